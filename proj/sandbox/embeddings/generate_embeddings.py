"""Writes the small embedding table used with the sandbox services.

Each word gets a seeded Gaussian vector; listed synonyms share a base
vector plus a little noise so they land close together.
"""

import random

DIM = 50
SEED = 20240917

WORDS = """
access account address age amount api body by card carts cart category city code
contacts count create customer customers data date delivery description email error
expand expires get header id in item items key label limit list login message method
name number order orders password path pay payment phone post price product products
put query register session set shelf shelves signin signup sku status store stores
street time title token total type update url user username users using value
""".split()

SYNONYMS = {
    "identifier": "id",
    "mail": "email",
    "qty": "quantity",
    "jwt": "token",
    "zip": "code",
}


def unit_gaussian(rng):
    return [rng.gauss(0.0, 1.0) for _ in range(DIM)]


def main():
    rng = random.Random(SEED)
    vectors = {}
    for word in WORDS + ["quantity"]:
        vectors[word] = unit_gaussian(rng)
    for word, base in SYNONYMS.items():
        noise = unit_gaussian(rng)
        vectors[word] = [b + 0.2 * n for b, n in zip(vectors[base], noise)]
    with open("sandbox-50d.txt", "w", encoding="utf-8") as out:
        for word in sorted(vectors):
            out.write(word + " " + " ".join(f"{x:.6f}" for x in vectors[word]) + "\n")


if __name__ == "__main__":
    main()
