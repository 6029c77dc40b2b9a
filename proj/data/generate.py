#!/usr/bin/env python3
"""Regenerates the bundled toy corpora and embedding files.

    python3 data/generate.py

Output is deterministic; the committed files are what this script writes.
"""
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
DIM = 50

ARTISTS = [("roy", "orbison"), ("norah", "jones"), ("miles", "davis"), ("etta", "james"),
           ("nina", "simone"), ("chet", "baker")]
PLAYLISTS = ["workout", "chill", "roadtrip", "sunday", "focus"]
CUISINES = ["french", "thai", "italian", "korean", "greek"]
CITIES = ["boston", "paris", "denver", "austin", "lisbon"]


def artist(rng):
    first, last = rng.choice(ARTISTS)
    return [(first, "B-artist"), (last, "E-artist")]


def words(text, tag="O"):
    return [(w, tag) for w in text.split()]


def play_music(rng):
    lead = rng.choice(["play", "put on", "i want to hear", "start"])
    tail = rng.choice(["", "songs", "music", "please"])
    return words(lead) + artist(rng) + words(tail)


def add_to_playlist(rng):
    lead = rng.choice(["add", "put", "save"])
    return (words(lead) + artist(rng) + words(rng.choice(["to", "onto"]) + " my")
            + [(rng.choice(PLAYLISTS), "S-playlist")] + words("playlist"))


def book_restaurant(rng):
    lead = rng.choice(["book a", "reserve a", "find me a"])
    return (words(lead) + [(rng.choice(CUISINES), "S-cuisine")]
            + words(rng.choice(["restaurant", "table", "place"]) + " in") + [(rng.choice(CITIES), "S-city")])


def toy(rng):
    makers = [("PlayMusic", play_music), ("AddToPlaylist", add_to_playlist),
              ("BookRestaurant", book_restaurant)]
    out, seen = [], set()
    for intent, make in makers:
        while sum(1 for _, i in out if i == intent) < 10:
            utt = make(rng)
            key = tuple(w for w, _ in utt)
            if key in seen:
                continue
            seen.add(key)
            out.append((utt, intent))
    rng.shuffle(out)
    return out


# The same food word is a cuisine when booking and a dish when cooking; only
# the opening verb, several tokens away, tells the two apart.
BOOK_VERBS = ["book", "reserve", "find"]
COOK_VERBS = ["cook", "make", "prepare"]
FILLERS = ["me", "something", "nice", "and", "quick", "for", "us", "tonight", "maybe", "really"]
FOODS = ["french", "thai", "italian", "korean", "greek", "spanish", "indian", "turkish"]


def disambiguation(rng, count):
    out = []
    for k in range(count):
        booking = k % 2 == 0
        verb = rng.choice(BOOK_VERBS if booking else COOK_VERBS)
        gap = [rng.choice(FILLERS) for _ in range(rng.randint(2, 5))]
        tag = "S-cuisine" if booking else "S-served_dish"
        tail = [rng.choice(FILLERS) for _ in range(rng.randint(0, 2))]
        utt = words(verb) + words(" ".join(gap)) + [(rng.choice(FOODS), tag)]
        if tail:
            utt += words(" ".join(tail))
        out.append((utt, "BookRestaurant" if booking else "GetRecipe"))
    rng.shuffle(out)
    return out


def write_corpus(path, corpus):
    with open(path, "w") as f:
        for n, (utt, intent) in enumerate(corpus):
            if n:
                f.write("\n")
            for w, t in utt:
                f.write(f"{w}\t{t}\n")
            f.write(f"#intent\t{intent}\n")


def write_embeddings(path, corpora, rng, skip=()):
    vocab = []
    for corpus in corpora:
        for utt, _ in corpus:
            for w, _ in utt:
                if w not in vocab and w not in skip:
                    vocab.append(w)
    with open(path, "w") as f:
        for w in vocab:
            f.write(w + " " + " ".join(f"{rng.gauss(0.0, 0.3):.6f}" for _ in range(DIM)) + "\n")


def main():
    rng = random.Random(20190813)
    corpus = toy(rng)
    write_corpus(HERE / "toy" / "train.txt", corpus)
    write_corpus(HERE / "toy" / "valid.txt", corpus[:9])
    # "chet" stays uncovered so the UNK row is exercised.
    write_embeddings(HERE / "toy" / "embeddings.txt", [corpus], rng, skip={"chet"})

    train = disambiguation(rng, 60)
    valid = disambiguation(rng, 40)
    write_corpus(HERE / "disambiguation" / "train.txt", train)
    write_corpus(HERE / "disambiguation" / "valid.txt", valid)
    write_embeddings(HERE / "disambiguation" / "embeddings.txt", [train, valid], rng)


if __name__ == "__main__":
    main()
