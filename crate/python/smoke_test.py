"""Smoke test for the qbias extension module.

Build and run from the repository root:

    cargo build --release -p qbias-py
    cp target/release/libqbias_py.so python/qbias.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import qbias  # noqa: E402


def main():
    assert qbias.stem("caresses") == "caress"
    assert qbias.mask_entities("What about your serve, Rafa?") == "What about your serve, <NOUN>?"
    assert qbias.split_questions("Congratulations. How was the serve today? Thanks.") == [
        "How was the serve today?"
    ]
    print("tokens:", qbias.tokenize("What about your serve, Rafa?"))

    commentary = [
        "Nadal serves wide and wins the point.",
        "A big serve down the middle, ace.",
        "Federer hits a forehand winner down the line.",
        "Double fault, break point for the server.",
    ]
    lm = qbias.LanguageModel.train(commentary)
    pp_game = lm.perplexity("What about your serve, Rafa?")
    pp_other = lm.perplexity("Who designed your clothes today?")
    print(f"pp game={pp_game:.2f} other={pp_other:.2f}")
    assert pp_game < pp_other

    again = qbias.LanguageModel.from_bytes(lm.to_bytes())
    assert again.perplexity("What about your serve, Rafa?") == pp_game

    typ = qbias.AtypicalityModel.fit(
        ["How was the serve today?", "How was the haircut?", "Serve and volley today?"]
    )
    assert math.isclose(typ.idf("haircut"), math.log(3.0))
    assert typ.classify("How was the haircut?") == "atypical"
    assert typ.classify("How was the serve today?") == "typical"

    mw = qbias.mann_whitney_u([1, 2, 3], [4, 5, 6], "less")
    assert mw["statistic"] == 0 and abs(mw["p_value"] - 0.05) < 1e-12
    w = qbias.wilcoxon_signed_rank([2, 4, 6, 8, 10], [1, 2, 3, 4, 5], "greater")
    assert w["statistic"] == 15 and w["p_value"] == 1 / 32
    print("ok")


if __name__ == "__main__":
    main()
