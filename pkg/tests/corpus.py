"""Hand-written program suites shared by the unit and acceptance tests."""

# (source, rule expected to fail)
ILL_TYPED = [
    ("x", "T-Var"),
    ("add(1, ())", "T-Prim"),
    ("normal_pdf(1, 2)", "T-Prim"),
    ("ifz () then 1 else 2", "T-Ifz"),
    ("ifz 0 then 1 else ()", "T-Ifz"),
    ("ifz (\\x:Real. x) then 1 else 1", "T-Ifz"),
    ("score(())", "T-Score"),
    ("inj[Real] A 1", "T-Inj"),
    ("inj[[A Real]] B 1", "T-Inj"),
    ("inj[[A Real]] A ()", "T-Inj"),
    ("inj[[A b]] A 1", "T-Inj"),
    ("inj[[A Real]] A (1, 2)", "T-Inj"),
    ("roll[Real] 1", "T-Roll"),
    ("roll[mu a. [Z | S a]] 1", "T-Roll"),
    ("roll[mu a. a] 1", "T-Roll"),
    ("\\x:a. x", "T-Lam"),
    ("1 2", "T-App"),
    ("(\\x:Real. x) ()", "T-App"),
    ("(\\f:Real -> Real. f) 1", "T-App"),
    ("sample sample", "T-App"),
    ("1; 2", "T-MatchUnit"),
    ("match 1 with { (a, b) -> a }", "T-MatchPair"),
    ("match (1, 2) with { (a, a) -> a }", "T-MatchPair"),
    ("match inj[[A Real | B Real]] A 1 with { A x -> x }", "T-MatchVariant"),
    ("match inj[[A Real | B Real]] A 1 with { A x -> x | B y -> () }", "T-MatchVariant"),
    ("match 1 with { A x -> x }", "T-MatchVariant"),
    ("match 1 with { roll w -> w }", "T-MatchRoll"),
]

_Z = "\\f. (\\x. f (\\v. x x v)) (\\x. f (\\v. x x v))"

CHURCH_CORPUS = [
    "3.5",
    "\\x. x",
    "(\\x. x) 1",
    "factor(3)",
    "1 2",
    "normal_rng(0, 1)",
    "normal_rng(0, 1) + normal_rng(5, 2)",
    "let a = normal_rng(0, 2) in "
    "let w1 = factor(normal_pdf(1.1, a * 1, 0.25)) in "
    "let w2 = factor(normal_pdf(1.9, a * 2, 0.25)) in "
    "let w3 = factor(normal_pdf(2.7, a * 3, 0.25)) in a",
    "let geom = \\self. \\p. ifz bernoulli_rng(p) then 1 + self self p else 0 in "
    "let n = geom geom 0.5 in let w = factor(exp(0 - n)) in n",
    "ifz bernoulli_rng(0.5) then \\x. x else 2",
    "(ifz bernoulli_rng(0.5) then \\x. x * 2 else 3) 4",
    "let f = \\x. \\y. x - y in f 5 3",
    "let twice = \\f. \\x. f (f x) in twice (\\y. y + uniform_rng(0, 1)) 0",
    "factor(normal_rng(0, 1))",
    "log(uniform_rng(-1, 1))",
    "ifz (\\x. x) then 1 else 2",
    "exp(\\x. x)",
    f"let y = {_Z} in let fact = y (\\fact. \\n. ifz n then 1 else n * fact (n - 1)) in fact 5",
    f"let y = {_Z} in let geo = y (\\g. \\n. ifz bernoulli_rng(0.3) then g (n + 1) else n) in geo 0",
    f"let y = {_Z} in "
    "let walk = y (\\w. \\x. ifz bernoulli_rng(0.2) then w (x + normal_rng(0, 1)) else x) in "
    "let v = walk 0 in factor(normal_pdf(v, 1, 0.5))",
    "(\\x. factor(x) + factor(x)) 2",
    "let k = \\x. \\y. x in k 1 (normal_rng(0, 1))",
    "let s = \\f. \\g. \\x. f x (g x) in s (\\a. \\b. a + b) (\\c. c * 2) uniform_rng(0, 10)",
    "min(normal_rng(0, 1), normal_rng(0, 1))",
    "ifz leq01(uniform_rng(0, 1), 0.5) then factor(2) else factor(0.5)",
    "let f = \\x. x in f f 3",
    "(\\x. x x) (\\y. 3)",
    "sqrt(normal_rng(0, 1))",
    "exponential_rng(1) / (1 + factor(0.5))",
    "let n = bernoulli_rng(0.5) + bernoulli_rng(0.5) in ifz n then \\x. x else n",
]

# (t1, t2, t3): t3 mentions x (bound to t1) and y (bound to t2)
COMMUTATIVITY_TRIPLES = [
    ("sample", "sample", "x + y"),
    ("sample", "sample", "x - y"),
    ("normal_rng(0, 1)", "uniform_rng(-1, 1)", "x * y"),
    ("(score(2); sample)", "sample", "x"),
    ("sample", "(score(sample); 1)", "x + y"),
    ("(let u = sample in score(u); u)", "normal_rng(1, 2)", "max(x, y)"),
    ("bernoulli_rng(0.3)", "sample", "ifz x then y else 0 - y"),
    ("sample", "sample", "(x, y)"),
    ("exponential_rng(1)", "sample", "score(y); x"),
    ("\\z:Real. z + sample", "sample", "x y"),
    ("sample", "\\z:Real. z * 2", "y x"),
    ("(sample, sample)", "sample", "match x with { (a, b) -> a + b * y }"),
    ("normal_rng(0, 1)", "score(normal_pdf(0.5, 0, 1))", "y; x"),
    ("inj[[L Real | R Real]] L sample", "sample", "match x with { L a -> a + y | R b -> b }"),
    ("sample", "sample", "score(x * y); x"),
    ("uniform_rng(0, 2)", "bernoulli_rng(0.5)", "ifz y then x else x * x"),
    ("sample", "log(sample)", "x + y"),
    ("sample", "score(sample)", "y; x + 1"),
    ("normal_rng(2, 0.5)", "sample", "div(x, y + 1)"),
    ("sample", "sample", "x + y + sample"),
]

NEGATIVE_PAIRS = [
    ("sample", "let r = sample in score(2); r"),
    ("sample", "sample * sample"),
    ("score(sample); sample", "sample"),
    ("let x = sample in ifz leq01(x, 0.5) then 1 else 0", "0.5"),
    ("(sample, sample)", "let x = sample in (x, x)"),
]


def commutativity_pair(t1: str, t2: str, t3: str) -> tuple[str, str]:
    return (f"let x = {t1} in let y = {t2} in {t3}",
            f"let y = {t2} in let x = {t1} in {t3}")


STREAM = "type Stoch = mu s. Unit -> Real * s;\n"
LIST = "type L = mu l. [Nil | Cons Real * l];\ntype LU = [Nil | Cons Real * L];\n"

# (prelude, rec term, context lambda applied to the recursive function)
REC_CASES = [
    ("", "rec(f : Real -> Real). \\n:Real. ifz n then 1 else n * f (n - 1)",
     "\\h:Real -> Real. h 5"),
    (STREAM, "rec(go : Real -> Stoch). \\x:Real. roll[Stoch] (\\_:Unit. (x, go (normal_rng(x, 1))))",
     "\\h:Real -> Stoch. match (unroll (h 0)) () with { (a, p) -> "
     "match (unroll p) () with { (b, q) -> match (unroll q) () with { (c, r) -> (a, (b, c)) } } }"),
    ("", "rec(g : Real -> Real). \\n:Real. ifz bernoulli_rng(0.5) then n else g (n + 1)",
     "\\h:Real -> Real. h 0"),
    ("", "rec(fib : Real -> Real). \\n:Real. ifz leq01(n, 1) then fib (n - 1) + fib (n - 2) else n",
     "\\h:Real -> Real. h 6"),
    ("", "rec(w : Real -> Real). \\x:Real. score(normal_pdf(x, 0, 2)); "
         "ifz bernoulli_rng(0.3) then w (x + normal_rng(0, 1)) else x",
     "\\h:Real -> Real. h 0"),
    (LIST, "rec(sum : L -> Real). \\l:L. match unroll l with "
           "{ Nil u -> 0 | Cons p -> match p with { (hd, tl) -> hd + sum tl } }",
     "\\h:L -> Real. h (roll[L] (inj[LU] Cons (sample, roll[L] (inj[LU] Cons "
     "(sample, roll[L] (inj[LU] Nil ()))))))"),
    (LIST, "rec(build : Real -> L). \\n:Real. ifz n then roll[L] (inj[LU] Nil ()) "
           "else roll[L] (inj[LU] Cons (sample, build (n - 1)))",
     "\\h:Real -> L. h 3"),
    ("", "rec(p : Real -> Real). \\n:Real. ifz n then 1 else (score(2); 2 * p (n - 1))",
     "\\h:Real -> Real. h 4"),
    ("", "rec(it : Real -> Real -> Real). \\n:Real. \\x:Real. ifz n then x else it (n - 1) (x + sample)",
     "\\h:Real -> Real -> Real. h 3 0"),
    ("", "rec(r : Unit -> Real). \\u:Unit. let z = sample in ifz leq01(z, 0.3) then r () else z",
     "\\h:Unit -> Real. h ()"),
]
