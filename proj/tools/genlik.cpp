#include "genlik/cli.hpp"

int main(int argc, char** argv) { return genlik::genlik_main(argc, argv); }
