"""routeguard: protect multi-file minilang projects by routing cross-file calls.

Cross-file calls are rewritten into ``forward_call`` expressions whose first
argument is an encrypted call descriptor. The decryption key of each callee
file is never stored: it is recomputed at run time from the closed hashes of
the files calling into it, so any edit to the code makes either the hash
check or the decryption fail, and the program stops.
"""

__version__ = "0.1.0"
