"""Local HTTP gateway and CLI over the engine, simulator, and store."""
