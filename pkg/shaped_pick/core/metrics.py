"""Prometheus metrics for training and evaluation."""

from prometheus_client import Counter, Gauge, Histogram

env_steps_total = Counter(
    "shaped_pick_env_steps_total",
    "Environment steps taken",
    ["phase"],
)

episodes_total = Counter(
    "shaped_pick_episodes_total",
    "Episodes rolled out",
    ["phase"],
)

optimizer_steps_total = Counter(
    "shaped_pick_optimizer_steps_total",
    "DDPG train_batch calls",
)

transitions_stored_total = Counter(
    "shaped_pick_transitions_stored_total",
    "Transitions written to the replay buffer",
    ["kind"],
)

epoch_duration_seconds = Histogram(
    "shaped_pick_epoch_duration_seconds",
    "Wall time per training epoch",
    buckets=(0.5, 1, 2, 5, 10, 30, 60, 120, 300),
)

eval_success_rate = Gauge(
    "shaped_pick_eval_success_rate",
    "Evaluation success rate of the latest epoch",
)
