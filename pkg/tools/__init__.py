# Configuration and JSON helpers shared by the command-line front end
