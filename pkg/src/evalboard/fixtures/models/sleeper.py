#!/usr/bin/env python3
"""Sleeper model: waits a fixed time per request, then answers.

Usage: sleeper.py [DELAY_MS] [HANDSHAKE_DELAY_MS]
"""
import json
import sys
import time


def main():
    delay_s = (float(sys.argv[1]) if len(sys.argv) > 1 else 100.0) / 1000.0
    handshake_delay_s = (float(sys.argv[2]) if len(sys.argv) > 2 else 0.0) / 1000.0
    if handshake_delay_s:
        time.sleep(handshake_delay_s)
    print(json.dumps({"status": "ready"}), flush=True)
    for line in sys.stdin:
        request = json.loads(line)
        time.sleep(delay_s)
        print(json.dumps({"uid": request["uid"], "label": "positive"}), flush=True)


if __name__ == "__main__":
    main()
