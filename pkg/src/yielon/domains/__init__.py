"""Task domains: each exposes an executor with ``run(island_id, algorithm, episode)``."""
