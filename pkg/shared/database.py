from sqlalchemy import create_engine, Column, String, Integer, Float, DateTime, Text
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import sessionmaker
from dotenv import load_dotenv
from datetime import datetime, timezone
import json
import os

load_dotenv()

Base = declarative_base()


# Database Models
class SweepPoint(Base):
    __tablename__ = 'sweep_points'
    plan_hash = Column(String, primary_key=True)
    point_index = Column(Integer, primary_key=True)
    status = Column(String, nullable=False)  # 'ok' or 'error'
    error = Column(String, nullable=True)  # exception class name
    message = Column(Text, nullable=True)
    coordinates = Column(Text, nullable=False)  # JSON {axis name: value}
    value = Column(Float, nullable=True)
    payload = Column(Text, nullable=True)  # JSON for vector observables
    elapsed = Column(Float, default=0.0)
    created = Column(DateTime, default=lambda: datetime.now(timezone.utc))


class SweepRun(Base):
    __tablename__ = 'sweep_runs'
    plan_hash = Column(String, primary_key=True)
    plan = Column(Text, nullable=False)
    code_version = Column(String, nullable=False)
    started = Column(DateTime, default=lambda: datetime.now(timezone.utc))


def database_url(directory: str) -> str:
    return os.getenv('DCE_SWEEP_DB') or f"sqlite:///{os.path.join(directory, 'sweep.db')}"


class SweepStore:
    """Append-only store of finished sweep points keyed by (plan hash, index)."""

    def __init__(self, url: str):
        self.engine = create_engine(url, echo=False)
        Base.metadata.create_all(self.engine)
        self.Session = sessionmaker(bind=self.engine)

    def register(self, plan_hash: str, plan_json: str, code_version: str):
        session = self.Session()
        try:
            if session.get(SweepRun, plan_hash) is None:
                session.add(SweepRun(plan_hash=plan_hash, plan=plan_json, code_version=code_version))
                session.commit()
        finally:
            session.close()

    def completed(self, plan_hash: str) -> set:
        session = self.Session()
        try:
            rows = session.query(SweepPoint.point_index).filter_by(plan_hash=plan_hash).all()
            return {row.point_index for row in rows}
        finally:
            session.close()

    def add(self, plan_hash: str, record: dict):
        session = self.Session()
        try:
            session.merge(SweepPoint(
                plan_hash=plan_hash,
                point_index=record['index'],
                status=record['status'],
                error=record.get('error'),
                message=record.get('message'),
                coordinates=json.dumps(record['coordinates']),
                value=record.get('value'),
                payload=json.dumps(record['payload']) if record.get('payload') is not None else None,
                elapsed=record.get('elapsed', 0.0),
            ))
            session.commit()
        finally:
            session.close()

    def records(self, plan_hash: str) -> list:
        session = self.Session()
        try:
            rows = session.query(SweepPoint).filter_by(plan_hash=plan_hash).order_by(SweepPoint.point_index).all()
            return [
                {
                    'index': row.point_index,
                    'status': row.status,
                    'error': row.error,
                    'message': row.message,
                    'coordinates': json.loads(row.coordinates),
                    'value': row.value,
                    'payload': json.loads(row.payload) if row.payload else None,
                    'elapsed': row.elapsed,
                } for row in rows
            ]
        finally:
            session.close()

    def close(self):
        self.engine.dispose()
