import sys
from pathlib import Path

# oracle helpers live next to the tests
sys.path.insert(0, str(Path(__file__).parent))
