// Builds the bundled test framework (including its default main) once as a
// static library that every unit-test binary links against.
#include <catch2/catch_amalgamated.cpp>  // NOLINT
