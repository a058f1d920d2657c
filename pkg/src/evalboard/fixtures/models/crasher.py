#!/usr/bin/env python3
"""Crasher model: handshakes, answers N requests, then exits with status 3.

Usage: crasher.py [ANSWER_FIRST_N]
"""
import json
import sys


def main():
    answer_first = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    print(json.dumps({"status": "ready"}), flush=True)
    answered = 0
    for line in sys.stdin:
        if answered >= answer_first:
            sys.exit(3)
        request = json.loads(line)
        print(json.dumps({"uid": request["uid"], "label": "ok"}), flush=True)
        answered += 1
    sys.exit(3)


if __name__ == "__main__":
    main()
