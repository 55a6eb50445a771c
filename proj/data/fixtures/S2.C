7 21
0.05029037565768352 0.09945786992827949 0.09901764444599963 -0.012188154559899593 -0.20215107832227971 -0.05585942860089273 0.11992614435361203 0.08894787292849977 -0.31748951893849514 -0.16986476520402954 -0.008393014189501927 0.2674233689096414 -0.06240777186549716 0.1541984415006276 0.24136762289595684 0.14253232597138996 0.18559601434960857 -0.684311847804952 0.11671204538025565 0.2524681515807576 0.7340185832938095
0.5076271463496368 0.32589522215717975 0.015446041684286585 -0.09000613609718676 -0.07961682557671515 0.18317462131373707 0.02455136328666521 -0.17778253873218286 0.26355540224520463 -0.11529615743488776 0.4327382968235555 -0.006507665863904881 -0.2561636636443458 0.5389452336072608 -0.4553049577586769 -0.2681941275590026 -0.27158929212035354 -0.2216764561569141 -0.38182555976557075 -0.08079973334968811 0.022381799926642937
-0.2709291165047945 -0.4809661758734687 0.3905417101405049 0.1741039556645744 0.17409472213997398 -0.13358498604265784 -0.1285914897958452 0.284702967789279 -0.03297145634234336 0.411428712362162 0.1528369318848603 0.016078413002566714 0.010768925448983006 0.41102447851770435 -0.18065678688429695 0.07156245868979408 0.21047692028280698 -0.20819996006050442 -0.06262096624357154 -0.3840843198475278 0.3682414631268289
0.0038320960173995776 -0.06441752151542413 -0.06243267964643686 0.1378465016966849 0.2851177861075564 -0.36224761765202873 0.012226632322778236 0.16510316512705728 -0.12157718321269793 -0.06070172306533168 -0.20837048800480687 0.20396814388051107 -0.12567034897779572 -0.1622745641066474 0.12681535498032015 -0.04048090674069981 0.16298929425564004 0.22411086493491553 -0.2419422039476065 -0.10960982985155329 0.26455446137351696
-0.12407863614258766 -0.28657653866898963 0.3585307484407975 -0.33752285940951365 0.13612251483945922 -0.02765926703816169 0.40163046912049205 0.5236713153603284 -0.421468821803835 0.10973037281025985 0.3889505116002164 0.2140562646979648 -0.08292392346406205 0.3168922624059219 -0.062146628085629645 -0.07350586690650401 -0.22979840299603413 -0.06735583573592716 -0.017774867973581767 -0.11210915828804992 0.45557642791382846
0.18915235301763303 -0.3040127531251134 0.22234125065294413 0.18063283184983814 0.22405382055163597 -0.11932013146095996 -0.10991583478630698 -0.28238546439165824 0.09522462792797726 0.37400961934926985 0.013191362996675619 0.18898724639930628 0.10496865709261054 0.3104398622908091 -0.27920553665574666 -0.09068956209867024 -0.23570734648263725 0.6404570304368673 0.0969390254389034 0.24608665502343047 0.7110629500256087
0.033780619661650926 0.16419528727559093 0.0706620094399292 0.07073051863320924 -0.35724972183176273 0.3497021008965602 0.04179156227027892 0.048826156242076285 0.15935043394613138 0.05336444634708344 -0.07932070550948969 0.16662562364207426 0.04864695374532132 -0.041098716089161054 -0.1747096131585275 -0.36195115656430815 -0.21741148209273556 0.05575464637230537 0.15614169451008628 0.06452798820833314 0.39285988636326563
