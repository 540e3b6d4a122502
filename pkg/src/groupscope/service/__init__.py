from groupscope.service.config import PipelineConfig
from groupscope.service.pipeline import run_pipeline
from groupscope.service.snapshot import SnapshotStore, write_snapshot

__all__ = ["PipelineConfig", "SnapshotStore", "run_pipeline", "write_snapshot"]
