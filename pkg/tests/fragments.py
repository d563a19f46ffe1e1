"""Satisfiable formulas from the two decidable fragments.

Every entry here must be decided SAT; the acceptance suite checks that the
checker never gives up on one of them.
"""

REACHABILITY = (
    "F p(x)",
    "F p(x) && F !p(x) && F [x <- f(x)]",
    "X (p(x) && [x <- f(x)]) && X X !p(x)",
    "F [x <- f(x)] && X F p(x)",
    "F (p(x) && [x <- g(x)] && X !p(x))",
    "F (p(x) && X [x <- f(x)] && X X !p(x))",
    "[x <- f(x)] && X (p(x) && !p(f(x)))",
    "[x <- f(x)] && X [x <- f(x)] && X X p(x) && !p(f(x))",
    "F (q(x, y) && [y <- g(x)]) && F !q(x, y)",
    "F [x <- y] && F [y <- x] && F (p(x) && !p(y))",
    "!G p(x) && !G !p(x) && X [x <- f(x)]",
    "F ((p(x) || q(x)) && [x <- f(x)]) && !(p(f(x)) || q(f(x)))",
    "X X X (p(x) && [x <- f(y)]) && X X X X !p(x)",
    "F F F p(f(x)) && !p(x)",
    "X ([x <- f(x)] && X ([x <- f(x)] && X (p(x) && !p(f(x)))))",
    "F ([x <- c()] && X (p(x) && F ([x <- f(x)] && X !p(x))))",
    "F (r(x, y) && !r(y, x))",
)

SINGLE_CELL = (
    "G p(x)",
    "G [x <- f(x)] && G F (p(x) && X !p(x))",
    "G [x <- f(x)] && F !p(x) && p(x)",
    "G (p(x) -> [x <- f(x)]) && G (!p(x) -> [x <- x]) && G F p(x)",
    "G F p(x) && G F !p(x) && G ([x <- f(x)] || [x <- g(x)])",
    "G ([x <- f(x)] || [x <- g(x)]) && G F (p(x) && X !p(x))",
    "G (p(x) || q(x)) && G !(p(x) && q(x))",
    "G (p(x) <-> X !p(x)) && G [x <- f(x)]",
    "(F p(x) -> X q(x)) && F p(x)",
    "G ([x <- f(x)] && (p(x) <-> !p(f(x))))",
    "(p(x) U [x <- f(x)]) && G F !p(x)",
    "G (p(x) -> X [x <- f(x)]) && F G p(x)",
    "F G (q(x) && [x <- x])",
    "G ([x <- f(x)] -> X p(x)) && F [x <- f(x)] && !p(x)",
)
