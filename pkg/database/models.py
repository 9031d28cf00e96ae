"""
SQLAlchemy ORM models for Monte Carlo tally results
"""
from datetime import datetime
from sqlalchemy import Column, Integer, String, Float, DateTime, CheckConstraint, UniqueConstraint
from sqlalchemy.orm import declarative_base
from sqlalchemy.sql import func

Base = declarative_base()


class TallyRecord(Base):
    """
    Model for storing one statistic of one Monte Carlo experiment
    """
    __tablename__ = 'tally_results'

    id = Column(Integer, primary_key=True, autoincrement=True)
    ensemble = Column(String(32), nullable=False)
    statistic = Column(String(32), nullable=False)
    # unsigned 64-bit seeds do not fit a signed BIGINT
    seed = Column(String(20), nullable=False)
    shards = Column(Integer, nullable=False)
    samples = Column(Integer, nullable=False)
    settings_label = Column(String(1024), nullable=False)
    hits = Column(Integer, nullable=False)
    trials = Column(Integer, nullable=False)
    fraction = Column(Float, nullable=False)
    stderr = Column(Float, nullable=False)
    ci95_lo = Column(Float, nullable=False)
    ci95_hi = Column(Float, nullable=False)
    min_value = Column(Float, nullable=True)
    created_at = Column(DateTime, nullable=False, default=datetime.utcnow, server_default=func.now())
    updated_at = Column(DateTime, nullable=False, default=datetime.utcnow, onupdate=datetime.utcnow, server_default=func.now())

    # Constraints
    __table_args__ = (
        CheckConstraint('hits >= 0 AND hits <= trials', name='check_hits_range'),
        UniqueConstraint(
            'ensemble', 'statistic', 'seed', 'shards', 'samples', 'settings_label',
            name='unique_tally_record'
        ),
    )

    def __repr__(self):
        return (
            f"<TallyRecord(id={self.id}, ensemble={self.ensemble}, statistic={self.statistic}, "
            f"hits={self.hits}/{self.trials}, seed={self.seed})>"
        )

    def to_dict(self):
        """Convert model instance to dictionary"""
        return {
            'id': self.id,
            'ensemble': self.ensemble,
            'statistic': self.statistic,
            'seed': int(self.seed),
            'shards': self.shards,
            'samples': self.samples,
            'hits': self.hits,
            'trials': self.trials,
            'fraction': self.fraction,
            'stderr': self.stderr,
            'ci95': [self.ci95_lo, self.ci95_hi],
            'min_value': self.min_value,
        }
