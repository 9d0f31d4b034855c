"""Training side of the vertex-guided planner: learns per-pixel vertex-ness
from exported map/target pairs and writes guidance rasters the planner reads.

Talks to the planner package only through files: VMAP1 maps, VGM1 rasters,
and the dataset manifest JSON.
"""

__version__ = "0.1.0"
