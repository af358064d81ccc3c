import pytest

from lexclass.config import PipelineConfig
from lexclass.corpus import corpus_stats
from lexclass.evaluation import cross_validate
from lexclass.pipeline import prepare_corpus
from lexclass.synth import generate_corpus


@pytest.mark.slow
def test__rf_mts_on_synthetic_corpus(resources):
    corpus = generate_corpus(n_docs=2000, n_classes=8, noise=0.2, seed=0)
    assert corpus_stats(corpus).label_cardinality == pytest.approx(1.4, abs=0.1)
    config = PipelineConfig(strategy="mts", model="rf", folds=10, n_jobs=-1)
    report = cross_validate(prepare_corpus(corpus, resources, config), config)
    assert report.micro_precision >= 0.85
    assert report.hamming_loss <= 0.05
