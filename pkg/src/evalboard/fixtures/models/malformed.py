#!/usr/bin/env python3
"""Malformed model: handshakes correctly, then emits a non-JSON line."""
import json
import sys


def main():
    print(json.dumps({"status": "ready"}), flush=True)
    for _ in sys.stdin:
        print("this is not json", flush=True)


if __name__ == "__main__":
    main()
