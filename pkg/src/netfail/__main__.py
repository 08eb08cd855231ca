from netfail.cli import main

raise SystemExit(main())
