"""End-to-end proof that the reports carry category signal.

Generates a small synthetic corpus (each category with its own import and
string signature), pushes every sample through the real analysis pipeline,
then trains the hashed bag-of-tokens baseline and prints the familiar
classification-report tables.
"""

import tempfile
from pathlib import Path

from pereport import classification_metrics, load_manifest, stratified_split, train_classifier
from pereport.classify import featurize_text, predict_many, render_table
from pereport.synth import generate_corpus

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "corpus"
    manifest_path = generate_corpus(out, per_class=40, seed=7)
    manifest = load_manifest(manifest_path.read_text("utf-8"))
    print(f"generated {len(manifest)} reports in 8 categories")

    train_entries, test_entries = stratified_split(manifest, 0.8, seed=7)
    print(f"stratified split: {len(train_entries)} train / {len(test_entries)} test\n")

    def vectors(entries):
        xs, ys = [], []
        for entry in entries:
            xs.append(featurize_text((out / f"{entry.sha256}.json").read_text()))
            ys.append(entry.category)
        return xs, ys

    train_x, train_y = vectors(train_entries)
    test_x, test_y = vectors(test_entries)

    model = train_classifier(list(zip(train_x, train_y)))
    print(f"trained in {len(model.loss_history)} epochs,"
          f" final loss {model.loss_history[-1]:.4f}\n")

    print("Training classification report")
    print(render_table(classification_metrics(predict_many(model, train_x), train_y)))
    print()
    print("Testing classification report")
    print(render_table(classification_metrics(predict_many(model, test_x), test_y)))
