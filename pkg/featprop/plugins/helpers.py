from featprop.plugins.config import register_plugin


@register_plugin
class TrainConfig:
    """
    Optimization hyper-parameters of one training run (Adam, full batch)
    """

    def __init__(self, learning_rate: float = 0.01, weight_decay: float = 5e-4, epochs: int = 200, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8, seed: int = 0):

        if learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {learning_rate}")
        if weight_decay < 0:
            raise ValueError(f"weight_decay must be non-negative, got {weight_decay}")
        if epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {epochs}")
        if not (0 < beta1 < 1 and 0 < beta2 < 1):
            raise ValueError(f"betas must lie in (0, 1), got ({beta1}, {beta2})")
        if epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")

        self.learning_rate: float = float(learning_rate)
        self.weight_decay: float = float(weight_decay)
        self.epochs: int = int(epochs)
        self.beta1: float = float(beta1)
        self.beta2: float = float(beta2)
        self.epsilon: float = float(epsilon)
        self.seed: int = int(seed)

    def __repr__(self) -> str:
        return (f"TrainConfig(learning_rate={self.learning_rate}, weight_decay={self.weight_decay}, epochs={self.epochs}, "
                f"beta1={self.beta1}, beta2={self.beta2}, epsilon={self.epsilon}, seed={self.seed})")
