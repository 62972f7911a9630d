#include <doctest.h>

TEST_SUITE("identification") {}
