#!/usr/bin/env python3
"""Regenerates the frozen graph exports from the pairing rules alone."""
import pathlib

HERE = pathlib.Path(__file__).resolve().parent


def integer_comb(n):
    h = (n - 1) // 2
    return list(range(-h, h + 1))


def half_integer_comb(n):
    h = n // 2
    return list(range(-h, 0)) + list(range(1, h + 1))


def doubled(m, half):
    if not half:
        return 2 * m
    return 2 * m - 1 if m > 0 else 2 * m + 1


def pair_by_sum(modes, half, offsets):
    # f_i + f_j = 2 f0 + k spacing  <=>  d_i + d_j = 2k
    edges = set()
    for a in modes:
        for b in modes:
            if a == b:
                continue
            if (doubled(a, half) + doubled(b, half)) // 2 in offsets and \
                    (doubled(a, half) + doubled(b, half)) % 2 == 0:
                edges.add(tuple(sorted((modes.index(a), modes.index(b)))))
    return sorted(edges)


def square(n, nx):
    modes = integer_comb(n)
    edges = set()
    for m in modes:
        for partner in (-m + 1, -m - 1, -m + nx, -m - nx):
            if partner in modes and partner != m:
                edges.add(tuple(sorted((modes.index(m), modes.index(partner)))))
    return modes, sorted(edges)


def honeycomb(n, nx):
    modes = half_integer_comb(n)
    return modes, pair_by_sum(modes, True, {1, -1, nx - 1})


def single_pump(n):
    modes = integer_comb(n)
    return modes, pair_by_sum(modes, False, {0})


def write(name, modes, edges):
    csv = ["i,j,weight"] + [f"{modes[a]},{modes[b]},1" for a, b in edges]
    (HERE / f"{name}.csv").write_text("\n".join(csv) + "\n")
    dot = ["graph cvcluster {"] + [f'  "{m}";' for m in modes]
    dot += [f'  "{modes[a]}" -- "{modes[b]}" [weight=1];' for a, b in edges]
    dot.append("}")
    (HERE / f"{name}.dot").write_text("\n".join(dot) + "\n")


if __name__ == "__main__":
    write("square_25_5", *square(25, 5))
    write("square_81_9", *square(81, 9))
    write("honeycomb_50_10", *honeycomb(50, 10))
    write("single_pump_9", *single_pump(9))
