"""Which geodesic words look D-contracting, and can short forbidden factors tell them apart?

For each geodesic word of a given length the contraction profile is sampled;
words whose measured diameter stays <= D are "good".  We then look for
subwords of length <= k that occur only in bad words.  If every bad word
contains one, the split is consistent with a subshift of finite type at this
scale.  This is evidence only: longer words may break it.
"""
import argparse
import json

from horoshift import fixtures
from horoshift.morse_metrics import contracting_words, separating_factors


def run():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--group", default="z2_star_z")
    ap.add_argument("--D", type=int, default=0)
    ap.add_argument("--length", type=int, default=4)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--radii", default="1,2")
    args = ap.parse_args()
    group = fixtures.group(args.group)
    radii = [int(r) for r in args.radii.split(",")]
    good, bad = contracting_words(group, args.D, args.length, radii)
    forbidden, missed = separating_factors(good, bad, args.k)
    print(json.dumps({
        "group": args.group, "D": args.D, "length": args.length, "radii": radii,
        "good": len(good), "bad": len(bad),
        "forbidden_factors": [group.format_word(f) for f in forbidden],
        "bad_words_not_caught": [group.format_word(w) for w in missed],
        "separated": not missed,
    }, indent=2))


if __name__ == "__main__":
    run()
