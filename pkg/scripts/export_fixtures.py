"""Write the bundled example games, advice, networks and circuits to docs/fixtures/."""

import argparse
import json
from fractions import Fraction
from pathlib import Path

from ceverify import fixtures as fx
from ceverify.bayesnet import model_to_dict, net_to_dict
from ceverify.model import advice_to_dict, game_to_dict


def dump(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print("wrote", path)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="docs/fixtures")
    out = Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)

    g = fx.chicken()
    dump(out / "chicken.game.json", game_to_dict(g))
    dump(out / "chicken-uniform.advice.json", advice_to_dict(fx.chicken_uniform(g), g))
    dump(out / "chicken-dd.advice.json", advice_to_dict(fx.chicken_advice(g, {("D", "D"): 1}), g))

    g = fx.market_entry()
    dump(out / "market-entry.game.json", game_to_dict(g))
    for first, second in (("exit", "fight"), ("enter", "pass")):
        d = fx.market_entry_advice(g, first, second)
        dump(out / f"market-entry-{first}-{second}.advice.json", advice_to_dict(d, g))

    g = fx.discontinuity()
    dump(out / "discontinuity.game.json", game_to_dict(g))
    for name, p in (("half", Fraction(1, 2)), ("zero", Fraction(0))):
        dump(out / f"discontinuity-{name}.advice.json", advice_to_dict(fx.discontinuity_advice(g, p), g))

    g = fx.three_players()
    dump(out / "three-players.game.json", game_to_dict(g))
    dump(out / "three-players.advice.json", advice_to_dict(fx.three_players_advice(g), g))

    dump(out / "xor-k2.net.json", net_to_dict(fx.xor_advice_net(2).net))
    dump(out / "xor-k2.model.json", model_to_dict(*fx.xor_model(2)))
    third = Fraction(1, 3)
    dump(out / "chicken.model.json", model_to_dict(*fx.chicken_model({("C", "C"): third, ("C", "D"): third, ("D", "C"): third})))

    dump(out / "circuit-true.json", {"gates": [["true"]], "output": 1})
    dump(out / "circuit-false.json", {"gates": [["false"]], "output": 1})
    dump(out / "circuit-and.json", {"gates": [["true"], ["false"], ["and", 1, 2]], "output": 3})
    dump(out / "circuit-or.json", {"gates": [["true"], ["false"], ["or", 1, 2]], "output": 3})


if __name__ == "__main__":
    main()
