#!/usr/bin/env python3
"""Regenerates data/toy: a small synthetic intent+slot corpus.

Five sentence templates over a 30-word vocabulary, 3 intents, 4 slot types
(city, artist, day, airline), with hand-written dependency trees. The dev
split recombines fillers into template instantiations never seen in train.
"""
from pathlib import Path

CITIES = [["boston"], ["denver"], ["dallas"], ["new", "york"]]
DAYS = ["monday", "friday"]
ARTISTS = ["beatles", "drake", "madonna"]
AIRLINES = ["delta", "united"]


class Sent:
    def __init__(self, intent):
        self.intent = intent
        self.tokens = []
        self.heads = []  # 1-based head per token, 0 = root
        self.tags = []

    def lit(self, token, head):
        self.tokens.append(token)
        self.heads.append(head)
        self.tags.append("O")
        return len(self.tokens)

    def slot(self, filler_tokens, slot_type, attach_head):
        """Adds a slot filler; its last token attaches to attach_head and
        earlier tokens chain to the last one. Returns the last index."""
        n0 = len(self.tokens)
        last = n0 + len(filler_tokens)
        for k, tok in enumerate(filler_tokens):
            self.tokens.append(tok)
            self.heads.append(last if n0 + k + 1 != last else attach_head)
            self.tags.append(("B-" if k == 0 else "I-") + slot_type)
        return last

    def func_then_slot(self, func_token, filler_tokens, slot_type, attach_head):
        """Function word whose head is the filler's last token."""
        fi = self.lit(func_token, 0)  # patched below
        last = self.slot(filler_tokens, slot_type, attach_head)
        self.heads[fi - 1] = last
        return last


def t_book_route(c1, c2, day):
    s = Sent("book_flight")
    s.lit("book", 0)
    s.lit("a", 3)
    s.lit("flight", 1)
    s.func_then_slot("from", c1, "city", 3)
    s.func_then_slot("to", c2, "city", 3)
    s.func_then_slot("on", [day], "day", 3)
    return s


def t_book_airline(al, c):
    s = Sent("book_flight")
    s.lit("book", 0)
    s.lit("a", 4)
    s.slot([al], "airline", 4)
    s.lit("flight", 1)
    s.func_then_slot("to", c, "city", 4)
    return s


def t_play_some(artist):
    s = Sent("play_music")
    s.lit("play", 0)
    s.lit("some", 3)
    s.lit("music", 1)
    s.func_then_slot("by", [artist], "artist", 3)
    return s


def t_play(artist):
    s = Sent("play_music")
    s.lit("play", 0)
    s.lit("music", 1)
    s.func_then_slot("by", [artist], "artist", 2)
    return s


def t_weather(c):
    s = Sent("get_weather")
    s.lit("what", 2)
    s.lit("is", 0)
    s.lit("the", 4)
    s.lit("weather", 2)
    s.func_then_slot("in", c, "city", 4)
    return s


def t_rain(c, day):
    s = Sent("get_weather")
    s.lit("will", 3)
    s.lit("it", 3)
    s.lit("rain", 0)
    s.func_then_slot("in", c, "city", 3)
    s.func_then_slot("on", [day], "day", 3)
    return s


def build():
    B, D, L, NY = CITIES
    mon, fri = DAYS
    bea, dra, mad = ARTISTS
    dlt, utd = AIRLINES

    train = [
        # routes: 18 of the 24 possible (c1, c2, day) combinations
        t_book_route(B, D, mon), t_book_route(B, D, fri),
        t_book_route(B, L, mon), t_book_route(B, NY, fri),
        t_book_route(D, B, fri), t_book_route(D, L, mon),
        t_book_route(D, NY, mon), t_book_route(D, NY, fri),
        t_book_route(L, B, mon), t_book_route(L, D, fri),
        t_book_route(L, NY, mon), t_book_route(L, B, fri),
        t_book_route(NY, B, mon), t_book_route(NY, D, fri),
        t_book_route(NY, L, mon), t_book_route(NY, L, fri),
        t_book_route(B, L, fri), t_book_route(D, B, mon),
        # airline bookings: 6 of 8
        t_book_airline(dlt, B), t_book_airline(dlt, L),
        t_book_airline(dlt, NY), t_book_airline(utd, D),
        t_book_airline(utd, NY), t_book_airline(utd, B),
        # music: all 6
        t_play_some(bea), t_play_some(dra), t_play_some(mad),
        t_play(bea), t_play(dra), t_play(mad),
        # weather: all 4
        t_weather(B), t_weather(D), t_weather(L), t_weather(NY),
        # rain: 6 of 8
        t_rain(B, mon), t_rain(D, fri), t_rain(L, mon),
        t_rain(NY, fri), t_rain(B, fri), t_rain(NY, mon),
    ]
    dev = [
        t_book_route(B, NY, mon), t_book_route(D, L, fri),
        t_book_route(L, D, mon), t_book_route(NY, B, fri),
        t_book_route(L, NY, fri), t_book_route(NY, D, mon),
        t_book_airline(dlt, D), t_book_airline(utd, L),
        t_rain(D, mon), t_rain(L, fri),
    ]
    assert len(train) == 40 and len(dev) == 10

    seen = {(tuple(s.tokens)) for s in train}
    for s in dev:
        assert tuple(s.tokens) not in seen, s.tokens

    vocab = {t for s in train for t in s.tokens}
    assert len(vocab) <= 30, len(vocab)
    assert {t for s in dev for t in s.tokens} <= vocab

    for s in train + dev:
        assert s.heads.count(0) == 1
        for i, h in enumerate(s.heads):
            assert 0 <= h <= len(s.tokens) and h != i + 1
    return train, dev


def write(split, sents, root):
    d = root / split
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "seq.in", "w") as f:
        f.writelines(" ".join(s.tokens) + "\n" for s in sents)
    with open(d / "seq.out", "w") as f:
        f.writelines(" ".join(s.tags) + "\n" for s in sents)
    with open(d / "label", "w") as f:
        f.writelines(s.intent + "\n" for s in sents)
    with open(root / f"{split}.dep", "w") as f:
        f.writelines(" ".join(map(str, s.heads)) + "\n" for s in sents)


def main():
    root = Path(__file__).resolve().parent.parent / "data" / "toy"
    train, dev = build()
    write("train", train, root)
    write("dev", dev, root)
    with open(root / "descriptions.tsv", "w") as f:
        f.write("book_flight\tbook a flight\n")
        f.write("play_music\tplay music\n")
        f.write("get_weather\tweather report\n")
        f.write("city\tname of a city\n")
        f.write("artist\tmusic artist\n")
        f.write("day\tday of the week\n")
        f.write("airline\tairline name\n")
    print(f"wrote {len(train)} train / {len(dev)} dev sentences, "
          f"vocab {len({t for s in train for t in s.tokens})}")


if __name__ == "__main__":
    main()
