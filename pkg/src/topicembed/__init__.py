"""Topic embeddings learned on top of fixed word embeddings.

Documents are modeled as mixtures of topics that live in the word embedding
space; variational generalized EM recovers the topic embeddings and each
document's topic proportions.
"""

from .corpus import Corpus, Document, Vocabulary, build_vocabulary, load_corpus, preprocess
from .embeddings import EmbeddingMatrix, align, load_embeddings
from .generator import SyntheticSpec, generate_labeled_corpus, generate_synthetic_corpus
from .model import (DocVariational, Hyperparams, ModelState, TopicSet, compute_topic_residuals,
                    e_step_document, elbo_core, gem_fit, infer_new_document, m_step,
                    residual_gradient, topic_gradient)
from .representation import MergedTopicSpace, doc_topic_proportions, merge_topic_sets

__version__ = "0.1.0"
