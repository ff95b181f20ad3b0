"""The canonical five-section report and token-budget truncation.

Reports serialize deterministically (identical analyses are byte-identical)
and can be shrunk to a token budget for encoder-sized inputs: the least
dense parts go first, global information never goes.
"""

from dataclasses import replace

from pereport import analyze, approximate_tokens, fit_to_budget, serialize_report
from pereport.report import TokenBudget
from pereport.synth import build_pe, fixture_specs

result = analyze(build_pe(fixture_specs()["injector"]), "injector_demo.exe")
report = result.report
payload = serialize_report(report)

print(f"serialized report: {len(payload)} bytes,"
      f" ~{approximate_tokens(report)} tokens")
print(f"deterministic: {serialize_report(report) == payload}\n")

# Inflate the import lists the way a statically linked sample would.
libs = {f"runtime{i}.dll": [f"HelperRoutine{j:03d}" for j in range(30)]
        for i in range(8)}
oversized = replace(report, imports=replace(report.imports, libraries=libs))
print(f"oversized variant: ~{approximate_tokens(oversized)} tokens")

for limit in (1024, 512, 300):
    fitted = fit_to_budget(oversized, TokenBudget(limit=limit))
    dropped = list(fitted.truncation.dropped) if fitted.truncation else []
    print(f"  budget {limit:4d}: ~{approximate_tokens(fitted):4d} tokens,"
          f" dropped {dropped or 'nothing'}")

fitted = fit_to_budget(oversized, TokenBudget(limit=512))
print("\nthe 512-token report still opens with the untouched global section:")
print(serialize_report(fitted).decode().split('"sections"')[0].rstrip(", \n"))
