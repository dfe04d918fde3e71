"""Learning stack for the follower: environment, reward, DQN training, evaluation."""
