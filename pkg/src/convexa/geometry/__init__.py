"""
Quaternion frames, Bruhat cells and the curve families built on them.
"""
