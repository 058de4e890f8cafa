import pytest

from chainrank.corpus import Document, build_index


@pytest.fixture
def toy_docs():
    return [
        Document("doc-a", "rare books", "the rare books room holds rare manuscripts"),
        Document("doc-b", "special collections", "special collections and archives overview"),
        Document("doc-c", "opening hours", "the reading room hours and directions"),
    ]


@pytest.fixture
def toy_corpus(toy_docs):
    return build_index(toy_docs)
