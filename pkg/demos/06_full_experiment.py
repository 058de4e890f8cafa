# End-to-end experiment, all in memory: index a synthetic corpus, simulate
# click logs, mine preferences with and without the chain strategies, train
# both models, and compare everything with interleaved evaluation.
#
# A larger run (1000 docs, 2000 training sessions) is what the acceptance
# suite performs; this one is sized to finish in a few seconds.

from chainrank import UserBehavior
from chainrank.feedback import strategy_counts
from chainrank.fixtures import make_fixture
from chainrank.pipeline import run_experiment

docs, intents = make_fixture(n_docs=500, seed=13)
art = run_experiment(
    docs, intents,
    seed=7,
    sessions=400,
    eval_sessions=200,
    behavior=UserBehavior(click_noise=0.1),
)

print(f"{len(art.log)} log events, {len(art.chains)} chains")
print("preference counts (all strategies):", strategy_counts(art.prefs["qc"]))
print("preference counts (within-query)  :", strategy_counts(art.prefs["nc"]))

qc = art.models["qc"]
print(f"\nchain-trained model: {qc.space.dim} features, "
      f"{sum(1 for *_, w in qc.term_doc_items() if w != 0.0)} active term/doc weights")

top = sorted(qc.term_doc_items(), key=lambda t: -abs(t[2]))[:5]
print("largest learned word/document associations:")
for term, doc, w in top:
    print(f"  {term:<14} {doc:<18} {w:+.1f}")

print()
print(art.report_text)
