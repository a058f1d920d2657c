#!/usr/bin/env python3
"""Constant-prediction model: answers every request with the same value.

Usage: constant.py [VALUE] [KEY]

VALUE defaults to "positive", KEY to "label" (use "answer_text" for QA).
"""
import json
import sys


def main():
    value = sys.argv[1] if len(sys.argv) > 1 else "positive"
    key = sys.argv[2] if len(sys.argv) > 2 else "label"
    print(json.dumps({"status": "ready"}), flush=True)
    for line in sys.stdin:
        request = json.loads(line)
        print(json.dumps({"uid": request["uid"], key: value}), flush=True)


if __name__ == "__main__":
    main()
