# Compare two rankings with balanced interleaving: merge them so a top-down
# reader sees the same number from each (within one), credit clicks to each
# side, and decide significance with an exact sign test.

from chainrank import attribute, combine, sign_test

r = ["d1", "d2", "d3", "d4"]
r_prime = ["d2", "d5", "d1", "d6"]

inter = combine(r, r_prime, first_r=True)
print("r        :", r)
print("r_prime  :", r_prime)
print("combined :", inter.combined)
for n in (3, 5):
    print(f"after top {n}: seen {inter.seen(n)[0]} of r, {inter.seen(n)[1]} of r_prime")

att = attribute(inter, clicked={"d1", "d5"})
print(f"\nclicks on d1, d5 -> scanned to depth {att.depth}: "
      f"{att.clicks_r} for r, {att.clicks_r_prime} for r_prime -> {att.winner}")

# Identical rankings can never produce a winner, whatever gets clicked.
same = combine(r, list(r), first_r=True)
print("identical rankings:", attribute(same, {"d1", "d3"}).winner)

print("\nsign test on win counts:")
for wins in ((8, 2), (5, 5), (392, 239)):
    print(f"  {wins[0]:>3} vs {wins[1]:>3}: p = {sign_test(*wins):.6g}")
