"""RRAM crossbar vector-matrix multiplication error simulator."""
