"""jumploci: exact splitting types, jumping lines and jumping conics of
rank-2 bundles on the projective plane, computed from finite presentations
by sums of line bundles.
"""

__version__ = "0.1.0"
