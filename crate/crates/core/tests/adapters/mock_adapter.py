#!/usr/bin/env python3
"""Test double for the JSON-lines model protocol.

usage: mock_adapter.py MODE [COEF ...] [--intercept B] [--record PATH]

MODE is one of: linear, count, miscount, bad-id, silent, crash, error, nan
"""
import json
import sys


def main():
    args = sys.argv[1:]
    mode = args.pop(0)
    record = None
    intercept = 0.0
    coefs = []
    while args:
        a = args.pop(0)
        if a == "--intercept":
            intercept = float(args.pop(0))
        elif a == "--record":
            record = open(args.pop(0), "a", newline="")
        else:
            coefs.append(float(a))

    served = 0
    for line in sys.stdin:
        served += 1
        if record:
            record.write(line)
            record.flush()
        req = json.loads(line)
        preds = []
        for row in req["instances"]:
            acc = intercept
            for c, x in zip(coefs, row):
                acc += c * x
            preds.append(acc)
        rid = req["id"]
        if mode == "silent":
            continue
        if mode == "crash":
            sys.exit(3)
        if mode == "count":
            preds = [float(served)] * len(preds)
        if mode == "miscount":
            preds = preds[:-1]
        if mode == "bad-id":
            rid += 100
        if mode == "error":
            out = {"id": rid, "error": "cannot score"}
        elif mode == "nan":
            sys.stdout.write('{"id": %d, "predictions": [NaN]}\n' % rid)
            sys.stdout.flush()
            continue
        else:
            out = {"id": rid, "predictions": preds}
        sys.stdout.write(json.dumps(out) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
