from .agent import (ActorCritic, Buffer, NonFiniteGradientError, PpoConfig, PpoPolicy,
                    TrainResult, load_checkpoint, policy_forward, save_checkpoint, train, update)
from .losses import (clipped_policy_loss, entropy, gae, masked_softmax, normalize_advantages,
                     total_loss, value_loss)
