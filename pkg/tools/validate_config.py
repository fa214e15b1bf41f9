# tools/validate_config.py
import json
import sys
from pathlib import Path

from pydantic import ValidationError

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from src.pipeline.resolve import config_digest, resolve_experiment  # noqa: E402
from src.schema import load_config  # noqa: E402


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    path = Path(argv[0]) if argv else ROOT / "data" / "examples" / "desk.toml"

    print(f"INPUT:{path}")
    print(path.read_text(encoding="utf-8"))

    try:
        cfg = load_config(path)
        print("\nConfig OK")
        print(json.dumps(cfg.model_dump(mode="json"), indent=2))

        print("\nResolved OK")
        print(json.dumps(resolve_experiment(cfg), indent=2))
        print(f"\nCONFIG_SHA256:{config_digest(cfg)}")
        return 0

    except ValidationError as e:
        print("\nVALIDATION ERROR")
        print(e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
