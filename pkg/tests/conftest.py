import sys
from pathlib import Path

from hypothesis import settings

# oracle helpers live next to the tests
sys.path.insert(0, str(Path(__file__).parent))

# exact sympy oracles are slow on the first call; timing is not under test
settings.register_profile("exact", deadline=None, derandomize=True)
settings.load_profile("exact")
