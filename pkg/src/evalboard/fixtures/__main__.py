"""Seed a store directory with the bundled fixtures."""

import argparse
import os

from . import seed_data_dir


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("DYNA_DATA_DIR", "data"),
        help="store root to seed (default: $DYNA_DATA_DIR or ./data)",
    )
    parser.add_argument(
        "--no-models", action="store_true", help="skip the runnable demo models"
    )
    args = parser.parse_args()
    store = seed_data_dir(args.data_dir, include_models=not args.no_models)
    print(f"seeded {store.root}")


if __name__ == "__main__":
    main()
