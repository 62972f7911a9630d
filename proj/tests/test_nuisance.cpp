#include <doctest.h>

TEST_SUITE("nuisance") {}
