#include "lpball/cli.hpp"

int main(int argc, char** argv) { return lpball::parse_and_dispatch(argc, argv); }
