''' Engine-wide constants for the VaCoAl associative memory.
    Values mirror the desk defaults used by the management commands;
    the Django settings module can override most of them per run.
'''


'''Reserved value of a cell that was never written'''
EMPTY = -(2 ** 31)

'''Legacy collision marker written on a collided cell'''
COLLISION = -1

'''Largest tid that can be assigned; leaves room for the sentinels'''
MAX_TID = 2 ** 31 - 3

'''Default hypervector length L (128 blocks of 100 bits)'''
default_length = 12800

'''Default block count B'''
default_blocks = 128

'''Default memory depth exponent m (2^m cells per block)'''
default_depth_exp = 27

'''Block counts used by the collision-rate configurations'''
standard_block_counts = (64, 128, 256, 512, 1024)

'''(B, m) pairs under the fixed total capacity B * 2^m = 2^34'''
standard_sweep = ((64, 28), (128, 27), (256, 26), (512, 25), (1024, 24))

'''Above this many cells (B * 2^m) the memory switches to sparse storage'''
dense_cell_limit = 2 ** 24

'''Search defaults: generations, CR2 halting threshold and frontier size'''
default_max_depth = 57
default_cr2_halt = 0.100
default_fs = 2000

'''Avalanche band inside which a feedback polynomial counts as healthy'''
avalanche_band = (0.45, 0.55)

'''Reserved codebook names'''
tiebreak_token = "__tiebreak__"
ordinal_prefix = "__ord__"

'''Predicate schema (up to 12 dimensions)'''
predicate_schema = (
    "FIELD",
    "LANGUAGE",
    "EMPLOYER",
    "MEMBER_OF",
    "ERA",
    "BIRTH_PLACE",
    "DEATH_PLACE",
    "CITIZENSHIP",
    "EDUCATED_AT",
    "OCCUPATION",
    "AWARD",
    "NOTABLE_WORK",
)

'''Era window width in years'''
default_era_window = 50

'''Binary file magics'''
codebook_magic = b"VCBK"
snapshot_magic = b"VCMS"
snapshot_version = 1

'''Float formatting for every CSV/JSON artifact'''
float_places = 9
