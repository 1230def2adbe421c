from shaped_pick.cli import main

raise SystemExit(main())
