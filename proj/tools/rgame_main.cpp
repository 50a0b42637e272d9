#include "rgame/cli.hpp"

int main(int argc, char** argv) { return rgame::cli::dispatch(argc, argv); }
