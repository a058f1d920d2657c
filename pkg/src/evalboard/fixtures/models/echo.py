#!/usr/bin/env python3
"""Echo model: deterministic input-dependent labels (last word of the
first string field, lowercased), so repeated runs agree exactly."""
import json
import sys


def main():
    print(json.dumps({"status": "ready"}), flush=True)
    for line in sys.stdin:
        request = json.loads(line)
        label = "empty"
        for key in sorted(request):
            if key != "uid" and isinstance(request[key], str) and request[key].strip():
                label = request[key].split()[-1].lower()
                break
        print(json.dumps({"uid": request["uid"], "label": label}), flush=True)


if __name__ == "__main__":
    main()
