from lexclass.main import evaluate, explain_sample, export_tree, prepare, synth, train

# Default function 'lexclass' trains the configured pipeline.
lexclass = train
