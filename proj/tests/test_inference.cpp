#include <doctest.h>

TEST_SUITE("inference") {}
