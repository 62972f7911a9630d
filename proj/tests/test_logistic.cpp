#include <doctest.h>

TEST_SUITE("logistic") {}
