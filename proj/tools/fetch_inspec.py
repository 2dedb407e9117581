#!/usr/bin/env python3
"""Write the Inspec test split as autokeygen JSONL (id, title, abstract, keywords).

Sources:
  --hulth DIR   the original release: DIR holds <id>.abstr (title on the first
                line, abstract after it) and <id>.uncontr (keyphrases separated by ';')
  --hf          the midas/inspec dataset through the `datasets` package
                (title and abstract are not separated there; the text goes to abstract)

The acceptance suite reads data/inspec_test.jsonl, or the path in AUTOKEY_INSPEC.
"""

import argparse
import json
import pathlib
import sys


def from_hulth(root):
    for abstr in sorted(pathlib.Path(root).glob("*.abstr")):
        kw = abstr.with_suffix(".uncontr")
        if not kw.exists():
            continue
        lines = abstr.read_text(encoding="utf-8", errors="replace").splitlines()
        # title lines come first; the abstract starts at the first tab-indented line
        title, body, in_title = [], [], True
        for line in lines:
            if in_title and line.strip() and not line.startswith("\t"):
                title.append(line.strip())
                continue
            in_title = False
            body.append(line.strip())
        keys = [k.strip() for k in " ".join(kw.read_text(encoding="utf-8").split()).split(";")]
        yield {
            "id": abstr.stem,
            "title": " ".join(title),
            "abstract": " ".join(b for b in body if b),
            "keywords": [k for k in keys if k],
        }


def from_hf():
    from datasets import load_dataset

    ds = load_dataset("midas/inspec", "raw", split="test")
    for row in ds:
        keys = list(row["extractive_keyphrases"]) + list(row["abstractive_keyphrases"])
        yield {
            "id": str(row["id"]),
            "title": "",
            "abstract": " ".join(row["document"]),
            "keywords": keys,
        }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--hulth", metavar="DIR")
    src.add_argument("--hf", action="store_true")
    ap.add_argument("-o", "--output", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "inspec_test.jsonl"))
    args = ap.parse_args()

    records = list(from_hulth(args.hulth) if args.hulth else from_hf())
    if not records:
        sys.exit("no documents found")
    with open(args.output, "w", encoding="utf-8") as out:
        for r in records:
            out.write(json.dumps(r, ensure_ascii=False) + "\n")
    print(f"{len(records)} documents -> {args.output}")


if __name__ == "__main__":
    main()
