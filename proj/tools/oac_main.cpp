#include "oac/cli.hpp"

int main(int argc, char** argv) { return oac::runCli(argc, argv); }
