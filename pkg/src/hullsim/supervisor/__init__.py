"""Session orchestration: simulation loop, wire protocol, recording, CLI."""
