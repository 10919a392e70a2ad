from __future__ import annotations

import random

WORDS = {
    "forms": ["Sonata", "Sonatina", "Etude", "Prelude", "Nocturne", "Waltz", "Mazurka", "Ballade",
              "Impromptu", "Fantasia", "Invention", "Minuet", "Rondo", "Romance", "Scherzo",
              "Bagatelle", "Intermezzo", "Toccata", "Capriccio", "Berceuse"],
    "adjectives": ["Quiet", "Golden", "Distant", "Little", "Silver", "Autumn", "Winter", "Morning",
                   "Evening", "Gentle", "Restless", "Forgotten", "Northern", "Hidden", "Bright"],
    "nouns": ["River", "Garden", "Lantern", "Harbor", "Meadow", "Mountain", "Window", "Forest",
              "Journey", "Dream", "Bell", "Storm", "Island", "Letter", "Dance"],
    "first": ["Anna", "Carl", "Clara", "Felix", "Ida", "Johann", "Louise", "Marie", "Otto", "Pauline",
              "Robert", "Sofia", "Teodor", "Vera", "Wilhelm"],
    "last": ["Albrecht", "Brandt", "Castell", "Dorn", "Engel", "Falk", "Gerber", "Hahn", "Keller",
             "Lindqvist", "Moreau", "Novak", "Ortega", "Petrov", "Richter", "Vogel"],
}


def generate_title(seed, words=None) -> tuple[str, str]:
    """Random (title, author) pair, deterministic per seed.

    ``words`` overrides the bundled lists; a missing or empty list makes the
    corresponding string empty.
    """
    words = WORDS if words is None else words
    rng = random.Random(seed)
    forms, adjs, nouns = words.get("forms"), words.get("adjectives"), words.get("nouns")
    first, last = words.get("first"), words.get("last")
    title = ""
    if forms and adjs and nouns:
        title = f"{rng.choice(forms)} of the {rng.choice(adjs)} {rng.choice(nouns)}"
        if rng.random() < 0.3:
            title += f" No. {rng.randint(1, 12)}"
    author = f"{rng.choice(first)} {rng.choice(last)}" if first and last else ""
    return title, author
