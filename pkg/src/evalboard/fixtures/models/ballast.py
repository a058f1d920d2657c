#!/usr/bin/env python3
"""Ballast model: holds a steady allocation of known size while answering.

Usage: ballast.py [MIB]

Allocates MIB mebibytes (default 512) before the handshake and keeps the
buffer alive for the whole run, touching every page so it is resident.
"""
import json
import sys


def main():
    mib = int(sys.argv[1]) if len(sys.argv) > 1 else 512
    ballast = bytearray(mib * 1024 * 1024)
    for i in range(0, len(ballast), 4096):
        ballast[i] = 1
    print(json.dumps({"status": "ready"}), flush=True)
    for line in sys.stdin:
        request = json.loads(line)
        print(json.dumps({"uid": request["uid"], "label": "positive"}), flush=True)
    del ballast


if __name__ == "__main__":
    main()
