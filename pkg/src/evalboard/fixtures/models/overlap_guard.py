#!/usr/bin/env python3
"""Overlap-detecting model: exits with status 7 if a second request
arrives before the current one was answered.

After reading a request it holds the response back for a short window and
polls stdin; a strictly sequential harness never has anything queued in
that window, a pipelining one trips the guard.

Usage: overlap_guard.py [WINDOW_MS]
"""
import json
import select
import sys
import time


def main():
    window_s = (float(sys.argv[1]) if len(sys.argv) > 1 else 30.0) / 1000.0
    print(json.dumps({"status": "ready"}), flush=True)
    while True:
        line = sys.stdin.readline()
        if not line:
            break
        request = json.loads(line)
        time.sleep(window_s)
        readable, _, _ = select.select([sys.stdin], [], [], 0)
        if readable:
            sys.exit(7)
        print(json.dumps({"uid": request["uid"], "label": "ok"}), flush=True)


if __name__ == "__main__":
    main()
