# shiftscan tests
