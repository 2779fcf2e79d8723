#!/usr/bin/env python3
"""Emit the bundled scene templates into scenes/."""

import pathlib
import sys

from holoflux.scene import emit_scene_template

KINDS = ("crossing", "nice-surface", "winding", "diffeo")


def main() -> int:
    out_dir = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path("scenes")
    out_dir.mkdir(parents=True, exist_ok=True)
    for kind in KINDS:
        path = out_dir / f"{kind}.json"
        path.write_text(emit_scene_template(kind))
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
