#include <doctest.h>

TEST_SUITE("estimators") {}
