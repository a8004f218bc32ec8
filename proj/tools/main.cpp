#include "commands.hpp"

int main(int argc, char** argv)
{
    return chfe::cli::run(argc, argv);
}
