import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from htap.instance import Agent, Instance, Task

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def matrix_instance(dist, task_types, agent_types, name="manual"):
    tasks = [Task(i + 1, t) for i, t in enumerate(task_types)]
    agents = [Agent(j + 1, t) for j, t in enumerate(agent_types)]
    return Instance(name, tuple(tasks), tuple(agents), np.asarray(dist, dtype=float))


@pytest.fixture
def tmp_json(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write
