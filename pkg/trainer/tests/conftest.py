import pytest

from container_helpers import pack_container, toy_patches


@pytest.fixture
def toy_container(tmp_path):
    images, labels = toy_patches()
    path = tmp_path / "toy.odst"
    path.write_bytes(pack_container(images, labels))
    return path, images, labels
