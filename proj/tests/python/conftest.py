import os
import sys
from pathlib import Path

# Inside a CMake build the extension is not installed; point at it directly.
ext = os.environ.get("VCSIM_EXTENSION_DIR")
if ext:
    sys.path[:0] = [ext, str(Path(__file__).resolve().parents[2] / "python")]
