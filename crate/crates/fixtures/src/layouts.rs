//! Directory and naming hazards: `main/java`, `src` and Kotlin layouts,
//! look-alike module directories, a dotted directory name, a module name
//! unrelated to its directory, Kotlin static imports and services.

use crate::{expect, text, Change, FixtureCommit, FixtureRepo, A2A, IDSD, MO};

const SCREEN: &str = "ui/src/main/kotlin/org/demo/ui/Screen.kt";
const UI_DESCRIPTOR: &str = "ui/src/main/java/module-info.java";
const APP_DESCRIPTOR: &str = "app/src/module-info.java";
const BOOT: &str = "app-core/src/org/demo/appcore/Boot.java";

fn screen(stage: u8) -> String {
    let mut s = String::from("package org.demo.ui\n\nimport org.demo.core.Texts\n");
    if stage >= 1 {
        s.push_str("import ch.tutteli.atrium.core.api.CoreFactory\n");
    }
    if stage >= 2 {
        s.push_str("import org.demo.core.Colors.red\n");
    }
    s.push_str("\nclass Screen {\n    fun title(name: String): String {\n        return Texts.upper(name)\n    }\n");
    if stage >= 1 {
        s.push_str("\n    fun check(value: String) {\n        val probe = CoreFactory.newExpect(value)\n        probe.toString()\n    }\n");
    }
    if stage >= 2 {
        s.push_str("\n    fun Alert(message: String): String {\n        return red(message)\n    }\n");
    }
    s.push_str("}\n");
    s
}

fn ui_descriptor(atrium: bool) -> String {
    let mut s = String::from("module org.demo.ui {\n    requires org.demo.core;\n    requires kotlin.stdlib;\n");
    if atrium {
        s.push_str("    requires ch.tutteli.atrium.core.api;\n");
    }
    s.push_str("}\n");
    s
}

fn app_descriptor(provides: bool) -> String {
    let mut s = String::from("module org.demo.app {\n    requires org.demo.core;\n");
    if provides {
        s.push_str("    provides org.demo.core.spi.Plugin with org.demo.app.PluginImpl;\n");
    }
    s.push_str("}\n");
    s
}

fn boot(local_texts: bool) -> String {
    let mut s = text(
        r#"
package org.demo.appcore;

import application.api.Facade;

public class Boot {
    private Facade facade;

    public void init(Facade f) {
        facade = f;
    }

    public String run() {
        return facade.call();
    }
"#,
    );
    if local_texts {
        s.push_str("\n    public String banner() {\n        return Texts.upper(run());\n    }\n");
    }
    s.push_str("}\n");
    s
}

pub fn repo() -> FixtureRepo {
    let root = vec![
        Change::write("README.md", "# layout fixture\n"),
        Change::write(
            "core/main/java/module-info.java",
            "module org.demo.core {\n    exports org.demo.core;\n    exports org.demo.core.spi;\n    uses org.demo.core.spi.Plugin;\n}\n",
        ),
        Change::write(
            "core/main/java/org/demo/core/Texts.java",
            text(
                r#"
package org.demo.core;

public final class Texts {
    public static String upper(String s) {
        return s.toUpperCase();
    }

    public static String shout(String s) {
        return upper(s) + "!";
    }
}
"#,
            ),
        ),
        Change::write(
            "core/main/java/org/demo/core/Colors.java",
            text(
                r#"
package org.demo.core;

public final class Colors {
    public static String red(String s) {
        return "\u001b[31m" + s + "\u001b[0m";
    }
}
"#,
            ),
        ),
        Change::write(
            "core/main/java/org/demo/core/spi/Plugin.java",
            "package org.demo.core.spi;\n\npublic interface Plugin {\n    String id();\n}\n",
        ),
        Change::write(APP_DESCRIPTOR, app_descriptor(false)),
        Change::write(
            "app/src/org/demo/app/App.java",
            text(
                r#"
package org.demo.app;

import org.demo.core.Texts;

public class App {
    public String greet(String name) {
        return Texts.upper(name);
    }
}
"#,
            ),
        ),
        Change::write(UI_DESCRIPTOR, ui_descriptor(false)),
        Change::write(SCREEN, screen(0)),
        Change::write(
            "atrium-api/src/main/java/module-info.java",
            "module ch.tutteli.atrium.core.api {\n    exports ch.tutteli.atrium.creating;\n}\n",
        ),
        Change::write(
            "atrium-api/src/main/kotlin/ch/tutteli/atrium/creating/Expect.kt",
            "package ch.tutteli.atrium.creating\n\ninterface Expect<T> {\n    fun toBe(expected: T): Expect<T>\n}\n",
        ),
    ];
    FixtureRepo {
        name: "fx-layouts",
        commits: vec![
            FixtureCommit {
                label: "initial-modules",
                message: "Add core, app, ui and atrium api modules",
                changes: root,
                expect: expect(true, &[A2A, IDSD, MO], 11, 9, &[8, 16]),
            },
            FixtureCommit {
                label: "facade-modules",
                message: "Add the application.api facade and app-core",
                changes: vec![
                    Change::write(
                        "application.api/src/main/java/module-info.java",
                        "module application.api {\n    exports application.api;\n}\n",
                    ),
                    Change::write(
                        "application.api/src/main/java/application/api/Facade.java",
                        text(
                            r#"
package application.api;

public class Facade {
    public String call() {
        return "ok";
    }
}
"#,
                        ),
                    ),
                    Change::write(
                        "app-core/src/module-info.java",
                        "module org.demo.appcore {\n    requires application.api;\n}\n",
                    ),
                    Change::write(BOOT, boot(false)),
                ],
                expect: expect(true, &[A2A, IDSD, MO], 4, 4, &[9, 12]),
            },
            FixtureCommit {
                label: "atrium-import",
                message: "Check screen values with atrium",
                changes: vec![
                    Change::write(UI_DESCRIPTOR, ui_descriptor(true)),
                    Change::write(SCREEN, screen(1)),
                ],
                expect: expect(true, &[IDSD, MO], 2, 2, &[16]),
            },
            FixtureCommit {
                label: "kotlin-static-import",
                message: "Colour alerts on the screen",
                changes: vec![Change::write(SCREEN, screen(2))],
                expect: expect(true, &[IDSD], 1, 1, &[5, 15]),
            },
            FixtureCommit {
                label: "provide-plugin",
                message: "Provide the app plugin",
                changes: vec![
                    Change::write(APP_DESCRIPTOR, app_descriptor(true)),
                    Change::write(
                        "app/src/org/demo/app/PluginImpl.java",
                        text(
                            r#"
package org.demo.app;

import org.demo.core.spi.Plugin;

public class PluginImpl implements Plugin {
    public String id() {
        return "app";
    }
}
"#,
                        ),
                    ),
                ],
                expect: expect(true, &[A2A, IDSD, MO], 2, 2, &[6]),
            },
            FixtureCommit {
                label: "local-texts",
                message: "Give app-core its own Texts helper",
                changes: vec![
                    Change::write(
                        "app-core/src/org/demo/appcore/Texts.java",
                        text(
                            r#"
package org.demo.appcore;

final class Texts {
    static String upper(String s) {
        return s.toUpperCase();
    }
}
"#,
                        ),
                    ),
                    Change::write(BOOT, boot(true)),
                ],
                expect: expect(true, &[A2A], 2, 0, &[13]),
            },
            FixtureCommit {
                label: "move-atrium",
                message: "Move the atrium api module under atrium/",
                changes: vec![
                    Change::rename(
                        "atrium-api/src/main/java/module-info.java",
                        "atrium/api/src/main/java/module-info.java",
                        None,
                    ),
                    Change::rename(
                        "atrium-api/src/main/kotlin/ch/tutteli/atrium/creating/Expect.kt",
                        "atrium/api/src/main/kotlin/ch/tutteli/atrium/creating/Expect.kt",
                        None,
                    ),
                ],
                expect: expect(true, &[A2A], 2, 0, &[8]),
            },
        ],
        extra_layouts: vec![],
        aliases: vec![],
        head_paths: 17,
        descriptors: vec![
            (
                "core/main/java/module-info.java",
                vec![
                    "exports org.demo.core",
                    "exports org.demo.core.spi",
                    "uses org.demo.core.spi.Plugin",
                ],
            ),
            (
                APP_DESCRIPTOR,
                vec![
                    "requires org.demo.core",
                    "provides org.demo.core.spi.Plugin with org.demo.app.PluginImpl",
                ],
            ),
            (
                UI_DESCRIPTOR,
                vec![
                    "requires org.demo.core",
                    "requires kotlin.stdlib",
                    "requires ch.tutteli.atrium.core.api",
                ],
            ),
            (
                "atrium/api/src/main/java/module-info.java",
                vec!["exports ch.tutteli.atrium.creating"],
            ),
            (
                "application.api/src/main/java/module-info.java",
                vec!["exports application.api"],
            ),
            ("app-core/src/module-info.java", vec!["requires application.api"]),
        ],
    }
}
