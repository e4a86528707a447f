"""Grammars and input generators shared by the test modules."""

import itertools
import random

from regreg.bench import CALC, PARENS, WHILE, gen_calc, gen_parens

LOOPS = r"""
S = A | B | C | D
A = ('a' | 'b')* 'b' 'x'
B = 'a'*? 'a' 'b' 'y'
C = ('ab' | 'a')+ 'c'
D = ('a' ('b' | 'bb'))* 'bd'
"""

# rules over the alphabet a b ( ) used for exhaustive checks
SMALL = r"""
S1 = 'a' | 'ab'
S2 = 'a'* 'b'
S3 = ('a' | 'b')* 'a'
S4 = nested('(', ('a' | S4)*, ')')
S5 = &'ab' ('a' | 'b')*
S6 = ~'a' . 'a'*
S7 = 'a'*? 'b'
S8 = ('ab' | 'a')+ ('b' | '')
S9 = 'a' S9 | 'b'
S10 = ('a' / 'ab') 'b'
S11 = nested('(', 'a'*, ')') 'b'*
S12 = [ab]+ ~'a' (')' | '')
S13 = 'a'* / 'b'
S14 = ('a' 'b'*)* '('
S15 = 'a' (S15 | '') 'b'
S16 = 'a' 'b'* | 'b' 'a'* | '(' S16 ')'
S17 = nested('(', S17*, ')') / 'a' / 'b'
S18 = 'ab' | 'b' | ')' ('a' | '')
S19 = 'a'+ ~'b' | 'b'+ &'a' | '(' .
"""

ALPHABET = "ab()"


def words(alphabet, maxlen):
    for n in range(maxlen + 1):
        for p in itertools.product(alphabet, repeat=n):
            yield "".join(p)


def mutate(text, rng):
    """Delete, insert or replace one character."""
    if not text or rng.random() < 0.3:
        i = rng.randint(0, len(text))
        return text[:i] + rng.choice("ab()x1;{}w ") + text[i:]
    i = rng.randrange(len(text))
    if rng.random() < 0.5:
        return text[:i] + text[i + 1:]
    return text[:i] + rng.choice("ab()x1;{}w ") + text[i + 1:]


def gen_while(rng, budget=40):
    def expr(d):
        r = rng.random()
        if d > 2 or r < 0.4:
            return rng.choice(["x", "y", "n", "1", "42"])
        if r < 0.8:
            return expr(d + 1) + rng.choice(["+", " + "]) + expr(d + 1)
        return "(" + expr(d + 1) + ")"

    def stmt(d):
        r = rng.random()
        if d > 2 or r < 0.5:
            return rng.choice(["x", "y", "whilex"]) + " = " + expr(d) + "; "
        if r < 0.8:
            cond = expr(d) + (" < " + expr(d) if rng.random() < 0.5 else "")
            return "while (" + cond + ") " + stmt(d + 1)
        return "{ " + "".join(stmt(d + 1) for _ in range(rng.randint(0, 2))) + "} "

    text = ""
    while True:
        nxt = text + stmt(0)
        if len(nxt) > budget:
            break
        text = nxt
        if rng.random() < 0.4:
            break
    if rng.random() < 0.3:
        text = mutate(text, rng)
    return text[:budget]


def gen_loops(rng):
    form = rng.randrange(4)
    if form == 0:
        text = "".join(rng.choice("ab") for _ in range(rng.randint(0, 8))) + "bx"
    elif form == 1:
        text = "a" * rng.randint(1, 8) + "by"
    elif form == 2:
        text = "".join(rng.choice(["ab", "a"]) for _ in range(rng.randint(1, 6))) + "c"
    else:
        text = "".join(rng.choice(["ab", "abb"]) for _ in range(rng.randint(0, 5))) + "bd"
    if rng.random() < 0.3:
        text = mutate(text, rng)
    return text


def gen_calc_input(rng):
    if rng.random() < 0.75:
        text = gen_calc(rng.randint(1, 40), rng.randrange(10 ** 6))
        return mutate(text, rng)[:40] if rng.random() < 0.2 else text
    return "".join(rng.choice("0123456789+-*()") for _ in range(rng.randint(0, 40)))


STRUCTURED = {
    "calc": (CALC, gen_calc_input),
    "parens": (PARENS, lambda rng: gen_parens(rng.randint(0, 38), rng)[:40]),
    "while": (WHILE, gen_while),
    "loops": (LOOPS, gen_loops),
}


def seeded_inputs(name, count, seed=0):
    rng = random.Random(f"{name}:{seed}")
    gen = STRUCTURED[name][1]
    return [gen(rng) for _ in range(count)]


def random_rule(rng, depth=0):
    """Random expression text over the exhaustive-check alphabet."""
    if depth > 3 or rng.random() < 0.25:
        return rng.choice(["'a'", "'b'", "'ab'", "'('", "''", ".", "[ab]", "[^a]"])

    def sub():
        return random_rule(rng, depth + 1)

    k = rng.randrange(9)
    if k == 0:
        return f"({sub()} | {sub()})"
    if k == 1:
        return f"({sub()} / {sub()})"
    if k == 2:
        return f"({sub()} {rng.choice(['a', 'b'])!r})*"
    if k == 3:
        return f"('a' {sub()})+"
    if k == 4:
        return f"&({sub()})"
    if k == 5:
        return f"~({sub()})"
    if k == 6:
        return f"nested('(', {sub()}, ')')"
    if k == 7:
        return f"({sub()} 'b')*? {sub()}"
    return f"{sub()} {sub()}"
