import pytest

from depthrank.services.parallel import chunk_ranges, ordered_map


def square(x):
    return x * x


class TestChunkRanges:
    def test_covers_range(self):
        assert chunk_ranges(10, 4) == [(0, 4), (4, 8), (8, 10)]

    def test_empty_and_oversized(self):
        assert chunk_ranges(0, 5) == []
        assert chunk_ranges(3, 50) == [(0, 3)]

    def test_size_at_least_one(self):
        assert chunk_ranges(2, 0) == [(0, 1), (1, 2)]


class TestOrderedMap:
    @pytest.mark.parametrize("n_jobs", [1, 2])
    def test_keeps_task_order(self, n_jobs):
        assert ordered_map(square, list(range(12)), n_jobs=n_jobs) == [x * x for x in range(12)]

    def test_no_tasks(self):
        assert ordered_map(square, [], n_jobs=2) == []
