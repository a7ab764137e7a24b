#!/usr/bin/env python3
"""Download public FastText and Word2Vec English vectors as .vec text files.

Only needed for the optional word-embedding reproduction test.  Nothing
else in the package touches the network.

    python scripts/fetch_word_vectors.py --dir data/
    RELREP_FASTTEXT=data/fasttext.vec RELREP_WORD2VEC=data/word2vec.vec \
        pytest tests/test_acceptance.py -k ac04

The gensim-data mirrors are used for both models.  The Word2Vec release is
in the binary word2vec layout and is converted to text here.  ``--limit``
keeps the first N (most frequent) words of each file.
"""

import argparse
import gzip
import shutil
import urllib.request
from pathlib import Path

import numpy as np

BASE = "https://github.com/RaRe-Technologies/gensim-data/releases/download"
SOURCES = {
    "fasttext": f"{BASE}/fasttext-wiki-news-subwords-300/fasttext-wiki-news-subwords-300.gz",
    "word2vec": f"{BASE}/word2vec-google-news-300/word2vec-google-news-300.gz",
}


def download(url, dest):
    if dest.exists():
        return dest
    tmp = dest.with_suffix(dest.suffix + ".part")
    with urllib.request.urlopen(url) as r, open(tmp, "wb") as f:
        shutil.copyfileobj(r, f)
    tmp.rename(dest)
    return dest


def text_to_vec(src, dest, limit):
    with gzip.open(src, "rt", encoding="utf-8", errors="replace") as f:
        n, d = map(int, f.readline().split())
        n = min(n, limit)
        rows = [next(f).rstrip() for _ in range(n)]
    with open(dest, "w", encoding="utf-8", newline="\n") as out:
        out.write(f"{len(rows)} {d}\n")
        out.writelines(r + "\n" for r in rows)


def binary_to_vec(src, dest, limit):
    with gzip.open(src, "rb") as f:
        n, d = map(int, f.readline().split())
        n = min(n, limit)
        with open(dest, "w", encoding="utf-8", newline="\n") as out:
            out.write(f"{n} {d}\n")
            for _ in range(n):
                word = bytearray()
                while (ch := f.read(1)) != b" ":
                    if ch != b"\n":
                        word += ch
                vec = np.frombuffer(f.read(4 * d), dtype="<f4").astype(np.float64)
                token = word.decode("utf-8", errors="replace")
                out.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dir", default="data")
    p.add_argument("--limit", type=int, default=200_000)
    args = p.parse_args()
    root = Path(args.dir)
    root.mkdir(parents=True, exist_ok=True)
    for name, url in SOURCES.items():
        raw = download(url, root / f"{name}.gz")
        dest = root / f"{name}.vec"
        if name == "word2vec":
            binary_to_vec(raw, dest, args.limit)
        else:
            text_to_vec(raw, dest, args.limit)
        print(f"{name}: {dest}")


if __name__ == "__main__":
    main()
