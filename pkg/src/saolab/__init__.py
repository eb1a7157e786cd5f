"""saolab: a Sample Adaptive Offset post-filter laboratory.

Classic SAO (edge/band offsets, merge mode), a CNN-weighted offset
generalization with bit-exact 16-bit integer inference, a Lagrangian
RDO encoder, a deterministic parameter bitstream, and a desk-scale
evaluation harness.
"""

__version__ = "0.1.0"
