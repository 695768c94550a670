from typing import Dict, Iterable, List, Optional


class Vocabulary:
    """
    Dense id mapping in order of first appearance. Used for raw node ids and label names of dataset files.
    """

    def __init__(self, token2id: Dict[str, int] = None, name: str = "token"):

        if token2id is None:
            token2id = {}

        self._token2id: Dict[str, int] = dict(token2id)
        self._id2token: Dict[int, str] = {idx: token for token, idx in self._token2id.items()}
        self.name: str = name

    @classmethod
    def from_serializable(cls, contents: Dict) -> "Vocabulary":

        return cls(**contents)

    def to_serializable(self) -> Dict:

        return {
            'token2id': self._token2id,
            'name': self.name}

    def add_token(self, token: str) -> int:

        if token in self._token2id:
            index = self._token2id[token]
        else:
            index = len(self._token2id)
            self._token2id[token] = index
            self._id2token[index] = token
        return index

    def add_many(self, tokens: Iterable[str]) -> List[int]:

        return [self.add_token(token) for token in tokens]

    def lookup_token(self, token: str) -> Optional[int]:

        return self._token2id.get(token, None)

    def lookup_index(self, index: int) -> str:

        if index not in self._id2token:
            raise ValueError(f"Index {index} is not present in the {self.name} vocabulary")

        return self._id2token[index]

    def tokens(self) -> List[str]:
        return [self._id2token[i] for i in range(len(self))]

    def __contains__(self, token: str) -> bool:
        return token in self._token2id

    def __str__(self):
        return f"Vocabulary(name={self.name}, size={len(self)})"

    def __len__(self):
        return len(self._token2id)
