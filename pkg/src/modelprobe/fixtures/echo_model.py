#!/usr/bin/env python3
"""Line-protocol demo model: answers each request with its first feature value."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    request = json.loads(line)
    print(json.dumps({"score": request["values"][0]}), flush=True)
