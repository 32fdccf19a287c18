#!/usr/bin/env python3
"""Writes the bundled training corpus, eval set and prompt list.

Output is a deterministic function of --seed. Sentences are lowercase,
one per line, grouped into short encyclopedia-style paragraphs whose order
is reshuffled on every pass.
"""

import argparse
import random
from pathlib import Path

COUNTRIES = [
    ("france", "paris", "french", "europe", "the seine"),
    ("germany", "berlin", "german", "europe", "the rhine"),
    ("italy", "rome", "italian", "europe", "the tiber"),
    ("spain", "madrid", "spanish", "europe", "the tagus"),
    ("japan", "tokyo", "japanese", "asia", "the sumida"),
    ("egypt", "cairo", "arabic", "africa", "the nile"),
    ("england", "london", "english", "europe", "the thames"),
    ("russia", "moscow", "russian", "europe", "the volga"),
    ("china", "beijing", "chinese", "asia", "the yellow river"),
    ("india", "delhi", "hindi", "asia", "the ganges"),
    ("brazil", "brasilia", "portuguese", "south america", "the amazon"),
    ("canada", "ottawa", "english and french", "north america", "the ottawa river"),
    ("kenya", "nairobi", "swahili", "africa", "the tana"),
    ("peru", "lima", "spanish", "south america", "the rimac"),
]

ANIMALS = [
    ("cats", "popular pets around the world", "small", "meat", "purr when they are happy"),
    ("dogs", "loyal and faithful friends", "friendly", "meat", "bark at strangers"),
    ("horses", "strong and fast animals", "large", "grass", "run across open fields"),
    ("cows", "gentle farm animals", "large", "grass", "give milk every day"),
    ("owls", "quiet hunters of the night", "small", "mice", "see well in the dark"),
    ("bees", "busy insects that make honey", "tiny", "nectar", "visit many flowers"),
    ("whales", "the largest animals in the sea", "huge", "fish", "sing long songs"),
    ("wolves", "wild animals that live in packs", "strong", "meat", "howl at night"),
    ("rabbits", "quick animals with long ears", "small", "grass", "dig deep holes"),
    ("eagles", "birds with sharp eyes", "large", "fish", "fly high above the mountains"),
]

LANGUAGES = [
    ("python", "popular programming language", "data science", "guido van rossum"),
    ("java", "widely used programming language", "large business systems", "james gosling"),
    ("rust", "safe systems programming language", "fast and reliable tools", "graydon hoare"),
    ("c", "small programming language", "operating systems", "dennis ritchie"),
    ("lisp", "very old programming language", "symbolic computing", "john mccarthy"),
]

SUBJECTS = [
    ("mathematics", "the language of science", "numbers and shapes"),
    ("music", "universal form of expression", "sound and rhythm"),
    ("physics", "the study of matter and energy", "motion and force"),
    ("history", "the study of the past", "people and events"),
    ("chemistry", "the study of substances", "atoms and molecules"),
    ("biology", "the study of living things", "cells and life"),
    ("poetry", "an old form of art", "words and rhythm"),
]

PLANETS = [
    ("mercury", "first", "small and hot"),
    ("venus", "second", "covered in thick clouds"),
    ("mars", "fourth", "red and cold"),
    ("jupiter", "fifth", "the largest planet"),
    ("saturn", "sixth", "famous for its rings"),
]

FACTS = [
    "the earth orbits around the sun every year",
    "the moon orbits around the earth every month",
    "water boils at one hundred degrees celsius",
    "water freezes at zero degrees celsius",
    "the sun is a star at the center of our solar system",
    "the brain contains about one hundred billion neurons",
    "the heart pumps blood through the body",
    "artificial intelligence can learn from data",
    "artificial intelligence is transforming the way we live",
    "light travels faster than sound",
    "plants need water and light to grow",
    "the ocean covers most of the earth",
    "hello how are you today",
    "i am fine thank you",
    "good morning to you",
    "the earth is the third planet from the sun",
    "trees give us shade and fresh air",
    "rain falls from the clouds",
    "ice is frozen water",
    "the sky is blue on a clear day",
]

NUMBERS = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]


def paragraphs():
    out = []
    for country, capital, lang, continent, river in COUNTRIES:
        out.append([
            f"the capital of {country} is {capital}",
            f"{capital} is the capital of {country}",
            f"{country} is a country in {continent}",
            f"people in {country} speak {lang}",
            f"the river {river} flows through {country}",
        ])
    for name, desc, size, food, habit in ANIMALS:
        out.append([
            f"{name} are {desc}",
            f"{name} are {size} animals",
            f"{name} eat {food}",
            f"many {name} {habit}",
        ])
    for name, desc, use, author in LANGUAGES:
        out.append([
            f"{name} is a {desc}",
            f"{name} was created by {author}",
            f"people use {name} for {use}",
        ])
    for name, desc, topic in SUBJECTS:
        out.append([
            f"{name} is {desc}" if not desc.startswith("universal") else f"{name} is a {desc}",
            f"{name} is about {topic}",
            f"students learn {name} at school",
        ])
    for name, order, desc in PLANETS:
        out.append([
            f"{name} is the {order} planet from the sun",
            f"{name} is {desc}",
            f"{name} orbits around the sun",
        ])
    for i in range(0, len(FACTS), 2):
        out.append(FACTS[i:i + 2])
    for a in range(1, 6):
        for b in range(1, 11 - a):
            out.append([f"{NUMBERS[a - 1]} plus {NUMBERS[b - 1]} is {NUMBERS[a + b - 1]}"])
    return out


EVAL = [
    "the capital of italy is rome",
    "dogs are loyal and faithful friends",
    "water boils at one hundred degrees celsius",
    "the earth orbits around the sun every year",
    "python is a popular programming language",
    "mathematics is the language of science",
    "people in japan speak japanese",
    "whales are the largest animals in the sea",
    "mars is the fourth planet from the sun",
    "the brain contains about one hundred billion neurons",
]

PROMPTS = [
    "the capital of france is",
    "cats are",
    "python is a",
    "the earth orbits",
    "water boils at",
    "artificial intelligence",
    "mathematics is",
    "dogs are loyal",
    "the sun is",
    "the brain contains",
    "music is a",
    "hello how are",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("--passes", type=int, default=24)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    paras = paragraphs()
    lines = []
    for _ in range(args.passes):
        order = list(range(len(paras)))
        rng.shuffle(order)
        for i in order:
            lines.extend(paras[i])
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "corpus.txt").write_text("\n".join(lines) + "\n")
    (args.out / "eval.txt").write_text("\n".join(EVAL) + "\n")
    (args.out / "prompts.txt").write_text("\n".join(PROMPTS) + "\n")


if __name__ == "__main__":
    main()
