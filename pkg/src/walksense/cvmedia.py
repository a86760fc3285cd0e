"""OpenCV-backed media tool: cut, probe, and frame-grab for MP4 files.

A fallback for machines without ffmpeg, spoken to through the same
command-template contract as any other media tool:

    python -m walksense.cvmedia cut --input in.mp4 --start 1.5 --dur 4.0 --output out.mp4
    python -m walksense.cvmedia probe --input in.mp4          # prints duration in ms
    python -m walksense.cvmedia frame --input in.mp4 --time 2.0 --output frame.png

Cuts are frame-accurate re-encodes (mp4v).  No audio support.
"""

from __future__ import annotations

import argparse
import sys


def _open(path: str):
    import cv2

    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        raise SystemExit(f"cannot open video: {path}")
    return cap


def cmd_probe(args) -> int:
    import cv2

    cap = _open(args.input)
    frames = cap.get(cv2.CAP_PROP_FRAME_COUNT)
    fps = cap.get(cv2.CAP_PROP_FPS)
    cap.release()
    if fps <= 0:
        print("cannot determine fps", file=sys.stderr)
        return 1
    print(f"{frames / fps * 1000.0:.3f}")
    return 0


def cmd_cut(args) -> int:
    import cv2

    cap = _open(args.input)
    fps = cap.get(cv2.CAP_PROP_FPS)
    total = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
    size = (int(cap.get(cv2.CAP_PROP_FRAME_WIDTH)),
            int(cap.get(cv2.CAP_PROP_FRAME_HEIGHT)))
    first = max(int(round(args.start * fps)), 0)
    count = int(round(args.dur * fps))
    if first >= total:
        print("start beyond end of video", file=sys.stderr)
        cap.release()
        return 1
    writer = cv2.VideoWriter(args.output, cv2.VideoWriter_fourcc(*"mp4v"),
                             fps, size)
    if not writer.isOpened():
        print(f"cannot open output: {args.output}", file=sys.stderr)
        cap.release()
        return 1
    cap.set(cv2.CAP_PROP_POS_FRAMES, first)
    written = 0
    while written < count:
        ok, frame = cap.read()
        if not ok:
            break
        writer.write(frame)
        written += 1
    writer.release()
    cap.release()
    return 0


def cmd_frame(args) -> int:
    import cv2

    cap = _open(args.input)
    fps = cap.get(cv2.CAP_PROP_FPS)
    total = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
    index = int(round(args.time * fps))
    if index >= total or index < 0:
        print(f"time {args.time}s outside video", file=sys.stderr)
        cap.release()
        return 1
    cap.set(cv2.CAP_PROP_POS_FRAMES, index)
    ok, frame = cap.read()
    cap.release()
    if not ok:
        print("cannot read frame", file=sys.stderr)
        return 1
    if not cv2.imwrite(args.output, frame):
        print(f"cannot write image: {args.output}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="walksense.cvmedia",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probe")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("cut")
    p.add_argument("--input", required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--dur", type=float, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_cut)

    p = sub.add_parser("frame")
    p.add_argument("--input", required=True)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_frame)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
