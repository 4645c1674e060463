#!/usr/bin/env python3
"""Regenerate corpus/golden.jsonl, the frozen full-scale hash corpus.

100 seeded (blob, nonce) pairs with blob lengths spanning 43..128 bytes,
each carrying the digest and the four stage-boundary checkpoints. The file
is committed; tests recompute every entry and compare byte for byte. Run
this only when the corpus layout itself changes, and treat any digest
difference from the committed file as a regression, never as a reason to
regenerate.
"""

import json
import pathlib
import random
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from cnhaven.hash_core import HashJob, hash_with_checkpoints  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "corpus" / "golden.jsonl"
SEED = 0x5EED_C0DE
N = 100


def main() -> None:
    rng = random.Random(SEED)
    OUT.parent.mkdir(exist_ok=True)
    with OUT.open("w") as fp:
        for i in range(N):
            length = rng.randint(43, 128)
            blob = rng.randbytes(length)
            nonce = rng.getrandbits(32)
            job = HashJob(blob=blob, nonce=nonce)
            digest, cp = hash_with_checkpoints(job)
            fp.write(json.dumps({
                "blob_hex": blob.hex(),
                "nonce": nonce,
                "digest_hex": digest.hex(),
                "checkpoints": {
                    "absorb_hex": cp["absorb_hex"],
                    "explode_head_hex": cp["explode_head_hex"],
                    "shuffle_head_hex": cp["shuffle_head_hex"],
                    "implode_state_hex": cp["implode_state_hex"],
                },
            }) + "\n")
    print(f"wrote {N} entries to {OUT}")


if __name__ == "__main__":
    main()
