from twohop.cli import main

raise SystemExit(main())
