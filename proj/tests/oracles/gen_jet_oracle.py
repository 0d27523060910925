# Generates frozen derivative tables for the jet and expression tests.
# Run offline; paste the printed C arrays into the test sources.
import sympy as sp

u, v = sp.symbols("u v")


def table(name, f, u0, v0, order=4):
    print(f"// {name}: {sp.sstr(f)} at ({u0}, {v0})")
    print(f"const double {name}[] = {{")
    rows = []
    for total in range(order + 1):
        for j in range(total + 1):
            i = total - j
            d = sp.diff(f, u, i, v, j)
            val = sp.N(d.subs([(u, u0), (v, v0)]), 22)
            rows.append(f"    {float(val):.17e}, // d({i},{j})")
    print("\n".join(rows))
    print("};")
    print()


# Composite exercising sin, exp, product, power.
f1 = sp.sin(u**2 + 3 * v) * sp.exp(u / 2)
table("kOracleSinExp", f1, sp.Rational(3, 10), sp.Rational(-1, 5))

# Composite exercising division and atan.
f2 = sp.atan((u - v) / (1 + u * v))
table("kOracleAtanDiv", f2, sp.Rational(2, 5), sp.Rational(1, 10))

# Composite exercising ln and sqrt.
f3 = sp.log(sp.sqrt(1 + u**2 + v**2) + u)
table("kOracleLnSqrt", f3, sp.Rational(1, 4), sp.Rational(-1, 2))

# Composition h(x0+U, y0+V) with inner maps vanishing at the base point.
x, y = sp.symbols("x y")
h = sp.exp(x) * sp.cos(y)
U = sp.Rational(3, 10) * u - sp.Rational(1, 5) * v + sp.Rational(1, 2) * u**2
V = u + sp.Rational(2, 5) * v - sp.Rational(1, 10) * v**2
comp = h.subs([(x, sp.Rational(1, 10) + U), (y, sp.Rational(1, 5) + V)])
table("kOracleCompose", comp, 0, 0)

# Full-expression jet for the parser test.
lam = sp.Symbol("lam")
f5 = sp.sin(u**2 + 3 * v) * sp.exp(u / 2) - lam * u / (1 + v**2)
f5 = f5.subs(lam, sp.Rational(7, 10))
table("kOracleExprJet", f5, sp.Rational(3, 10), sp.Rational(-1, 5))

print("// eval checks")
print(f"// f2 value at (0.4, 0.1): {float(sp.N(f2.subs([(u, sp.Rational(2,5)), (v, sp.Rational(1,10))]), 22)):.17e}")
